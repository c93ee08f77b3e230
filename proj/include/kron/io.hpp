#pragma once

// JSON serialization for fields, elements, matrices, families, pencils and
// certificates. Parsers annotate every error with the JSON path of the
// offending value; all emitters produce canonical forms (sorted object keys
// come from the JSON library, reduced rationals and full-length extension
// coefficient arrays from here), so emitted files are byte-reproducible.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kron/equiv_bridge.hpp"

namespace kron::io {

using json = nlohmann::json;

[[noreturn]] inline void fail(const std::string& path,
                              const std::string& msg) {
  throw InputError(path + ": " + msg);
}

inline const json& need(const json& j, const char* key,
                        const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing key '") + key + "'");
  return *it;
}

inline std::size_t size_from_json(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    fail(path, "expected a non-negative integer");
  return static_cast<std::size_t>(j.get<long long>());
}

// --- elements ---

inline json element_to_json(const Element& x) {
  const FieldPtr& f = x.field();
  switch (f->kind) {
    case FieldKind::Rationals:
      return x.rational().get_str();
    case FieldKind::Prime:
      return x.residue();
    case FieldKind::Extension: {
      json arr = json::array();
      for (const auto& c : x.coeffs()) arr.push_back(element_to_json(c));
      return arr;
    }
  }
  throw InvariantError("unknown field kind");
}

inline Element element_from_json(const json& j, const FieldPtr& f,
                                 const std::string& path) {
  switch (f->kind) {
    case FieldKind::Rationals: {
      if (j.is_number_integer()) return f->from_int(j.get<long long>());
      if (!j.is_string())
        fail(path, "rational element must be an integer or a string");
      const std::string s = j.get<std::string>();
      const auto slash = s.find('/');
      const std::string ns =
          slash == std::string::npos ? s : s.substr(0, slash);
      const std::string ds =
          slash == std::string::npos ? std::string("1") : s.substr(slash + 1);
      mpz_class num, den;
      try {
        num = mpz_class(ns);
        den = mpz_class(ds);
      } catch (const std::invalid_argument&) {
        fail(path, "malformed rational literal '" + s + "'");
      }
      if (den == 0) fail(path, "rational denominator is zero");
      mpq_class v(num, den);
      v.canonicalize();
      return f->from_rational(v);
    }
    case FieldKind::Prime: {
      if (!j.is_number_integer())
        fail(path, "prime-field element must be an integer");
      return f->from_int(j.get<long long>());
    }
    case FieldKind::Extension: {
      if (!j.is_array()) {
        Element c = element_from_json(j, f->base, path);
        std::vector<Element> v(f->degree, f->base->zero());
        v[0] = std::move(c);
        return f->from_coeffs(std::move(v));
      }
      if (j.size() > f->degree)
        fail(path, "element has " + std::to_string(j.size()) +
                       " coefficients but the extension degree is " +
                       std::to_string(f->degree));
      std::vector<Element> v(f->degree, f->base->zero());
      for (std::size_t i = 0; i < j.size(); ++i)
        v[i] = element_from_json(j[i], f->base,
                                 path + "[" + std::to_string(i) + "]");
      return f->from_coeffs(std::move(v));
    }
  }
  fail(path, "unknown field kind");
}

// --- fields ---

inline json field_to_json(const FieldPtr& f) {
  switch (f->kind) {
    case FieldKind::Rationals:
      return json{{"kind", "rationals"}};
    case FieldKind::Prime:
      return json{{"kind", "prime"}, {"p", f->p}};
    case FieldKind::Extension: {
      json mod = json::array();
      for (const auto& c : f->modulus) mod.push_back(element_to_json(c));
      return json{{"kind", "extension"},
                  {"base", field_to_json(f->base)},
                  {"modulus", mod}};
    }
  }
  throw InvariantError("unknown field kind");
}

inline FieldPtr field_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "field descriptor must be an object");
  const json& kj = need(j, "kind", path);
  if (!kj.is_string()) fail(path + ".kind", "field kind must be a string");
  const std::string kind = kj.get<std::string>();
  if (kind == "rationals") return Field::rationals();
  if (kind == "prime") {
    const json& pj = need(j, "p", path);
    if (!pj.is_number_integer())
      fail(path + ".p", "characteristic must be an integer");
    try {
      return Field::prime(
          static_cast<std::uint64_t>(pj.get<long long>()));
    } catch (const InputError& e) {
      fail(path + ".p", e.what());
    }
  }
  if (kind == "extension") {
    FieldPtr base = field_from_json(need(j, "base", path), path + ".base");
    const json& mj = need(j, "modulus", path);
    if (!mj.is_array())
      fail(path + ".modulus", "modulus must be a coefficient array");
    std::vector<Element> mod;
    for (std::size_t i = 0; i < mj.size(); ++i)
      mod.push_back(element_from_json(
          mj[i], base, path + ".modulus[" + std::to_string(i) + "]"));
    try {
      return make_extension(base, std::move(mod));
    } catch (const InputError& e) {
      fail(path + ".modulus", e.what());
    }
  }
  fail(path + ".kind", "unknown field kind '" + kind + "'");
}

// --- matrices ---

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j)
      r.push_back(element_to_json(m.at(i, j)));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Matrix matrix_from_json_sized(const json& j, const FieldPtr& f,
                                     std::size_t rows, std::size_t cols,
                                     const std::string& path) {
  if (!j.is_array() || j.size() != rows)
    fail(path, "expected " + std::to_string(rows) + " matrix rows");
  Matrix m(f, rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const json& r = j[i];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!r.is_array() || r.size() != cols)
      fail(rp, "expected " + std::to_string(cols) + " row entries");
    for (std::size_t c = 0; c < cols; ++c)
      m.at(i, c) = element_from_json(r[c], f,
                                     rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline Matrix matrix_from_json(const json& j, const FieldPtr& f,
                               const std::string& path) {
  if (!j.is_array()) fail(path, "matrix must be an array of rows");
  if (j.empty())
    fail(path, "matrix needs at least one row; shapes with zero rows need "
               "explicit sizes");
  if (!j[0].is_array()) fail(path + "[0]", "matrix row must be an array");
  return matrix_from_json_sized(j, f, j.size(), j[0].size(), path);
}

// --- labels ---

inline std::vector<std::string> labels_from_json(const json& j,
                                                 const std::string& path) {
  if (!j.is_array()) fail(path, "labels must be an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string ip = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_string()) fail(ip, "label must be a string");
    std::string s = j[i].get<std::string>();
    if (s.empty()) fail(ip, "label must be non-empty");
    if (s[0] == '~') fail(ip, "labels may not use the reserved '~' prefix");
    for (const auto& prev : out)
      if (prev == s) fail(ip, "duplicate label '" + s + "'");
    out.push_back(std::move(s));
  }
  return out;
}

// --- pencils ---

inline Pencil pencil_from_json(const json& j, const std::string& path) {
  FieldPtr f = field_from_json(need(j, "field", path), path + ".field");
  Matrix A = matrix_from_json(need(j, "A", path), f, path + ".A");
  Matrix B = matrix_from_json(need(j, "B", path), f, path + ".B");
  try {
    return Pencil(std::move(A), std::move(B));
  } catch (const InputError& e) {
    fail(path, e.what());
  }
}

inline json pencil_to_json(const Pencil& p) {
  return json{{"field", field_to_json(p.field())},
              {"A", matrix_to_json(p.A)},
              {"B", matrix_to_json(p.B)}};
}

// --- family pairs ---

struct FamilyPair {
  MatrixFamily A;
  MatrixFamily B;
};

inline std::vector<Matrix> family_mats_from_json(
    const json& j, const FieldPtr& f, std::size_t count, std::size_t rows,
    std::size_t cols, const std::string& path) {
  if (!j.is_array() || j.size() != count)
    fail(path, "expected " + std::to_string(count) + " matrices");
  std::vector<Matrix> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(matrix_from_json_sized(
        j[i], f, rows, cols, path + "[" + std::to_string(i) + "]"));
  return out;
}

inline FamilyPair pair_from_json(const json& j, const std::string& path) {
  FieldPtr f = field_from_json(need(j, "field", path), path + ".field");
  auto labels = labels_from_json(need(j, "labels", path), path + ".labels");
  std::size_t n = size_from_json(need(j, "n", path), path + ".n");
  std::size_t p = j.is_object() && j.contains("p")
                      ? size_from_json(j.at("p"), path + ".p")
                      : n;
  auto As = family_mats_from_json(need(j, "A", path), f, labels.size(), n, p,
                                  path + ".A");
  auto Bs = family_mats_from_json(need(j, "B", path), f, labels.size(), n, p,
                                  path + ".B");
  try {
    return {make_family(f, n, p, labels, std::move(As)),
            make_family(f, n, p, labels, std::move(Bs))};
  } catch (const InputError& e) {
    fail(path, e.what());
  }
}

inline json pair_to_json(const MatrixFamily& A, const MatrixFamily& B) {
  json as = json::array(), bs = json::array();
  for (const auto& m : A.mats) as.push_back(matrix_to_json(m));
  for (const auto& m : B.mats) bs.push_back(matrix_to_json(m));
  return json{{"field", field_to_json(A.field)}, {"labels", A.labels},
              {"n", A.rows},                     {"p", A.cols},
              {"A", std::move(as)},              {"B", std::move(bs)}};
}

// --- certificates ---

inline json sim_cert_to_json(const SimilarityCertificate& c) {
  return json{{"kind", "similarity"},
              {"field", field_to_json(c.field)},
              {"P", matrix_to_json(c.P)}};
}

inline SimilarityCertificate sim_cert_from_json(const json& j,
                                                const std::string& path) {
  const json& kj = need(j, "kind", path);
  if (!kj.is_string() || kj.get<std::string>() != "similarity")
    fail(path + ".kind", "expected a similarity certificate");
  FieldPtr f = field_from_json(need(j, "field", path), path + ".field");
  Matrix P = matrix_from_json(need(j, "P", path), f, path + ".P");
  if (P.rows() != P.cols())
    fail(path + ".P", "certificate matrix must be square");
  return {std::move(f), std::move(P)};
}

// Equivalence certificates carry no field descriptor of their own; the
// field comes from the surrounding document.
inline json equiv_cert_to_json(const Matrix& P, const Matrix& Q) {
  return json{{"kind", "equivalence"},
              {"P", matrix_to_json(P)},
              {"Q", matrix_to_json(Q)}};
}

inline EquivalenceCertificate equiv_cert_from_json(const json& j,
                                                   const FieldPtr& context,
                                                   const std::string& path) {
  const json& kj = need(j, "kind", path);
  if (!kj.is_string() || kj.get<std::string>() != "equivalence")
    fail(path + ".kind", "expected an equivalence certificate");
  Matrix P = matrix_from_json(need(j, "P", path), context, path + ".P");
  Matrix Q = matrix_from_json(need(j, "Q", path), context, path + ".Q");
  if (P.rows() != P.cols())
    fail(path + ".P", "certificate matrix must be square");
  if (Q.rows() != Q.cols())
    fail(path + ".Q", "certificate matrix must be square");
  return {context, std::move(P), std::move(Q)};
}

// --- canonical form output ---

inline json kronecker_to_json(const KroneckerForm& kf) {
  json blocks = json::array();
  for (const auto& b : kf.blocks) {
    json e{{"kind", block_kind_name(b.kind)},
           {"size", b.size},
           {"rows", b.rows},
           {"cols", b.cols}};
    if (b.kind == BlockKind::Regular) e["payload"] = matrix_to_json(b.payload);
    auto [ra, rb] = b.render(kf.field);
    e["rendered"] = json{{"A", matrix_to_json(ra)}, {"B", matrix_to_json(rb)}};
    blocks.push_back(std::move(e));
  }
  return json{{"field", field_to_json(kf.field)},
              {"blocks", std::move(blocks)},
              {"P1", matrix_to_json(kf.P1)},
              {"Q1", matrix_to_json(kf.Q1)}};
}

// --- descent jobs ---

struct DescendJob {
  FieldPtr base;
  FieldPtr ext;
  MatrixFamily A;
  MatrixFamily B;
  Matrix P;
};

inline DescendJob descend_job_from_json(const json& j,
                                        const std::string& path) {
  FieldPtr base =
      field_from_json(need(j, "base_field", path), path + ".base_field");
  FieldPtr ext =
      field_from_json(need(j, "ext_field", path), path + ".ext_field");
  if (!is_subtower(base, ext))
    fail(path + ".ext_field", "extension field is not a tower over the base");
  auto labels = labels_from_json(need(j, "labels", path), path + ".labels");
  std::size_t n = size_from_json(need(j, "n", path), path + ".n");
  auto As = family_mats_from_json(need(j, "A", path), base, labels.size(), n,
                                  n, path + ".A");
  auto Bs = family_mats_from_json(need(j, "B", path), base, labels.size(), n,
                                  n, path + ".B");
  auto cert =
      sim_cert_from_json(need(j, "certificate", path), path + ".certificate");
  if (!same_field(cert.field, ext))
    fail(path + ".certificate.field",
         "certificate field differs from ext_field");
  try {
    return {base,
            ext,
            make_family(base, n, n, labels, std::move(As)),
            make_family(base, n, n, labels, std::move(Bs)),
            std::move(cert.P)};
  } catch (const InputError& e) {
    fail(path, e.what());
  }
}

inline json descend_job_to_json(const DescendJob& job) {
  json as = json::array(), bs = json::array();
  for (const auto& m : job.A.mats) as.push_back(matrix_to_json(m));
  for (const auto& m : job.B.mats) bs.push_back(matrix_to_json(m));
  return json{{"base_field", field_to_json(job.base)},
              {"ext_field", field_to_json(job.ext)},
              {"labels", job.A.labels},
              {"n", job.A.rows},
              {"A", std::move(as)},
              {"B", std::move(bs)},
              {"certificate", sim_cert_to_json({job.ext, job.P})}};
}

struct DescendEquivJob {
  FieldPtr base;
  FieldPtr ext;
  MatrixFamily A;
  MatrixFamily B;
  Matrix P;
  Matrix Q;
};

inline DescendEquivJob descend_equiv_job_from_json(const json& j,
                                                   const std::string& path) {
  FieldPtr base =
      field_from_json(need(j, "base_field", path), path + ".base_field");
  FieldPtr ext =
      field_from_json(need(j, "ext_field", path), path + ".ext_field");
  if (!is_subtower(base, ext))
    fail(path + ".ext_field", "extension field is not a tower over the base");
  auto labels = labels_from_json(need(j, "labels", path), path + ".labels");
  std::size_t n = size_from_json(need(j, "n", path), path + ".n");
  std::size_t p = size_from_json(need(j, "p", path), path + ".p");
  auto As = family_mats_from_json(need(j, "A", path), base, labels.size(), n,
                                  p, path + ".A");
  auto Bs = family_mats_from_json(need(j, "B", path), base, labels.size(), n,
                                  p, path + ".B");
  auto cert = equiv_cert_from_json(need(j, "certificate", path), ext,
                                   path + ".certificate");
  if (cert.P.rows() != n)
    fail(path + ".certificate.P", "row-side certificate matrix must be n x n");
  if (cert.Q.rows() != p)
    fail(path + ".certificate.Q",
         "column-side certificate matrix must be p x p");
  try {
    return {base,
            ext,
            make_family(base, n, p, labels, std::move(As)),
            make_family(base, n, p, labels, std::move(Bs)),
            std::move(cert.P),
            std::move(cert.Q)};
  } catch (const InputError& e) {
    fail(path, e.what());
  }
}

// --- verification jobs ---

struct VerifyJob {
  MatrixFamily A;
  MatrixFamily B;
  std::optional<SimilarityCertificate> sim;
  std::optional<EquivalenceCertificate> equiv;
};

inline VerifyJob verify_job_from_json(const json& j,
                                      const std::string& path) {
  FamilyPair pr = pair_from_json(j, path);
  const json& cj = need(j, "certificate", path);
  const json& kj = need(cj, "kind", path + ".certificate");
  if (!kj.is_string())
    fail(path + ".certificate.kind", "certificate kind must be a string");
  const std::string kind = kj.get<std::string>();
  VerifyJob job{std::move(pr.A), std::move(pr.B), std::nullopt, std::nullopt};
  if (kind == "similarity") {
    job.sim = sim_cert_from_json(cj, path + ".certificate");
  } else if (kind == "equivalence") {
    job.equiv =
        equiv_cert_from_json(cj, job.A.field, path + ".certificate");
  } else {
    fail(path + ".certificate.kind",
         "unknown certificate kind '" + kind + "'");
  }
  return job;
}

}  // namespace kron::io
