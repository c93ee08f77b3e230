#pragma once

// Exact field arithmetic: the rationals, prime fields F_p, and nested
// extension towers K[t]/(f) with f monic irreducible. Fields are immutable
// shared descriptors; elements are values tagged with their field.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kron/common.hpp"

namespace kron {

class Field;
using FieldPtr = std::shared_ptr<const Field>;

enum class FieldKind { Rationals, Prime, Extension };

bool same_field(const FieldPtr& a, const FieldPtr& b);

class Element {
 public:
  Element() = default;

  const FieldPtr& field() const { return field_; }
  bool valid() const { return field_ != nullptr; }

  const mpq_class& rational() const { return std::get<mpq_class>(value_); }
  std::uint64_t residue() const { return std::get<std::uint64_t>(value_); }
  // Coefficient list over the base field, length == extension degree.
  const std::vector<Element>& coeffs() const {
    return std::get<std::vector<Element>>(value_);
  }

  bool is_zero() const;
  bool is_one() const;

  friend bool operator==(const Element& a, const Element& b);
  friend bool operator!=(const Element& a, const Element& b) {
    return !(a == b);
  }

 private:
  friend class Field;
  FieldPtr field_;
  std::variant<std::monostate, mpq_class, std::uint64_t, std::vector<Element>>
      value_;
};

// Immutable field descriptor. Construct via rationals(), prime(),
// make_extension(); equality of descriptors is structural.
class Field : public std::enable_shared_from_this<Field> {
 public:
  FieldKind kind = FieldKind::Rationals;
  std::uint64_t p = 0;           // Prime only
  FieldPtr base;                 // Extension only
  std::vector<Element> modulus;  // Extension only: monic, degree+1 coeffs
  std::size_t degree = 0;        // Extension only, >= 1

  static FieldPtr rationals();
  static FieldPtr prime(std::uint64_t p);
  static FieldPtr extension(const FieldPtr& base,
                            std::vector<Element> modulus);

  bool is_finite() const { return characteristic() != 0; }

  std::uint64_t characteristic() const {
    switch (kind) {
      case FieldKind::Rationals: return 0;
      case FieldKind::Prime: return p;
      case FieldKind::Extension: return base->characteristic();
    }
    return 0;
  }

  // Product of extension degrees down to the prime field / rationals.
  std::uint64_t total_degree() const {
    return kind == FieldKind::Extension ? degree * base->total_degree() : 1;
  }

  // Number of elements, if finite and representable in 64 bits.
  std::optional<std::uint64_t> cardinality() const;

  Element zero() const;
  Element one() const;
  Element from_int(long long v) const;
  Element from_rational(const mpq_class& v) const;    // Rationals only
  Element from_residue(std::uint64_t v) const;        // Prime only
  Element from_coeffs(std::vector<Element> c) const;  // Extension only

  Element add(const Element& a, const Element& b) const;
  Element sub(const Element& a, const Element& b) const;
  Element mul(const Element& a, const Element& b) const;
  Element neg(const Element& a) const;
  Element inv(const Element& a) const;
  Element div(const Element& a, const Element& b) const {
    return mul(a, inv(b));
  }

 private:
  Field() = default;
  using Payload = std::variant<std::monostate, mpq_class, std::uint64_t,
                               std::vector<Element>>;
  Element wrap(Payload v) const;
};

namespace detail {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b,
                            std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t invmod(std::uint64_t a, std::uint64_t m) {
  // Extended Euclid; m prime, 0 < a < m.
  long long t = 0, newt = 1;
  long long r = static_cast<long long>(m), newr = static_cast<long long>(a);
  while (newr != 0) {
    long long q = r / newr;
    t = std::exchange(newt, t - q * newt);
    r = std::exchange(newr, r - q * newr);
  }
  require_invariant(r == 1, "inverse in a prime field failed");
  if (t < 0) t += static_cast<long long>(m);
  return static_cast<std::uint64_t>(t);
}

inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// nullopt on 64-bit overflow.
inline std::optional<std::uint64_t> checked_pow(std::uint64_t b,
                                                std::uint64_t e) {
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 0; i < e; ++i) {
    acc *= b;
    if (acc > UINT64_MAX) return std::nullopt;
  }
  return static_cast<std::uint64_t>(acc);
}

}  // namespace detail

inline Element Field::wrap(Payload v) const {
  Element e;
  e.field_ = shared_from_this();
  e.value_ = std::move(v);
  return e;
}

inline FieldPtr Field::rationals() {
  static FieldPtr instance = [] {
    auto f = std::shared_ptr<Field>(new Field());
    f->kind = FieldKind::Rationals;
    return FieldPtr(f);
  }();
  return instance;
}

inline FieldPtr Field::prime(std::uint64_t p) {
  require_input(p >= 2 && p <= (1ull << 31),
                "prime field characteristic out of range");
  require_input(detail::is_prime_u64(p), "characteristic is not prime");
  auto f = std::shared_ptr<Field>(new Field());
  f->kind = FieldKind::Prime;
  f->p = p;
  return f;
}

inline bool same_field(const FieldPtr& a, const FieldPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FieldKind::Rationals: return true;
    case FieldKind::Prime: return a->p == b->p;
    case FieldKind::Extension: {
      if (a->degree != b->degree) return false;
      if (!same_field(a->base, b->base)) return false;
      for (std::size_t i = 0; i <= a->degree; ++i)
        if (!(a->modulus[i] == b->modulus[i])) return false;
      return true;
    }
  }
  return false;
}

inline bool operator==(const Element& a, const Element& b) {
  require_input(same_field(a.field_, b.field_),
                "comparing elements of different fields");
  return a.value_ == b.value_;
}

inline Element Field::zero() const {
  switch (kind) {
    case FieldKind::Rationals: return wrap(mpq_class(0));
    case FieldKind::Prime: return wrap(std::uint64_t{0});
    case FieldKind::Extension:
      return wrap(std::vector<Element>(degree, base->zero()));
  }
  throw InvariantError("bad field kind");
}

inline Element Field::one() const {
  switch (kind) {
    case FieldKind::Rationals: return wrap(mpq_class(1));
    case FieldKind::Prime: return wrap(std::uint64_t{1});
    case FieldKind::Extension: {
      std::vector<Element> c(degree, base->zero());
      c[0] = base->one();
      return wrap(std::move(c));
    }
  }
  throw InvariantError("bad field kind");
}

inline Element Field::from_int(long long v) const {
  switch (kind) {
    case FieldKind::Rationals:
      return wrap(mpq_class(mpz_class(static_cast<long>(v))));
    case FieldKind::Prime: {
      long long m = v % static_cast<long long>(p);
      if (m < 0) m += static_cast<long long>(p);
      return wrap(static_cast<std::uint64_t>(m));
    }
    case FieldKind::Extension: {
      std::vector<Element> c(degree, base->zero());
      c[0] = base->from_int(v);
      return wrap(std::move(c));
    }
  }
  throw InvariantError("bad field kind");
}

inline Element Field::from_rational(const mpq_class& v) const {
  require_input(kind == FieldKind::Rationals, "field is not the rationals");
  mpq_class c = v;
  c.canonicalize();
  return wrap(std::move(c));
}

inline Element Field::from_residue(std::uint64_t v) const {
  require_input(kind == FieldKind::Prime, "field is not a prime field");
  return wrap(v % p);
}

inline Element Field::from_coeffs(std::vector<Element> c) const {
  require_input(kind == FieldKind::Extension, "field is not an extension");
  require_input(c.size() == degree, "coefficient list has wrong length");
  for (const auto& x : c)
    require_input(same_field(x.field(), base),
                  "coefficient from wrong base field");
  return wrap(std::move(c));
}

inline bool Element::is_zero() const {
  switch (field_->kind) {
    case FieldKind::Rationals: return rational() == 0;
    case FieldKind::Prime: return residue() == 0;
    case FieldKind::Extension: {
      for (const auto& c : coeffs())
        if (!c.is_zero()) return false;
      return true;
    }
  }
  return false;
}

inline bool Element::is_one() const { return *this == field_->one(); }

inline Element Field::add(const Element& a, const Element& b) const {
  switch (kind) {
    case FieldKind::Rationals:
      return wrap(mpq_class(a.rational() + b.rational()));
    case FieldKind::Prime: {
      std::uint64_t s = a.residue() + b.residue();
      return wrap(s >= p ? s - p : s);
    }
    case FieldKind::Extension: {
      std::vector<Element> c;
      c.reserve(degree);
      for (std::size_t i = 0; i < degree; ++i)
        c.push_back(base->add(a.coeffs()[i], b.coeffs()[i]));
      return wrap(std::move(c));
    }
  }
  throw InvariantError("bad field kind");
}

inline Element Field::sub(const Element& a, const Element& b) const {
  return add(a, neg(b));
}

inline Element Field::neg(const Element& a) const {
  switch (kind) {
    case FieldKind::Rationals: return wrap(mpq_class(-a.rational()));
    case FieldKind::Prime:
      return wrap(a.residue() == 0 ? std::uint64_t{0} : p - a.residue());
    case FieldKind::Extension: {
      std::vector<Element> c;
      c.reserve(degree);
      for (const auto& x : a.coeffs()) c.push_back(base->neg(x));
      return wrap(std::move(c));
    }
  }
  throw InvariantError("bad field kind");
}

inline Element Field::mul(const Element& a, const Element& b) const {
  switch (kind) {
    case FieldKind::Rationals:
      return wrap(mpq_class(a.rational() * b.rational()));
    case FieldKind::Prime:
      return wrap(detail::mulmod(a.residue(), b.residue(), p));
    case FieldKind::Extension: {
      // Convolution, then reduction modulo the monic modulus.
      std::vector<Element> prod(2 * degree - 1, base->zero());
      for (std::size_t i = 0; i < degree; ++i) {
        if (a.coeffs()[i].is_zero()) continue;
        for (std::size_t j = 0; j < degree; ++j)
          prod[i + j] = base->add(prod[i + j],
                                  base->mul(a.coeffs()[i], b.coeffs()[j]));
      }
      for (std::size_t k = prod.size(); k-- > degree;) {
        if (prod[k].is_zero()) continue;
        Element lead = prod[k];
        prod[k] = base->zero();
        for (std::size_t j = 0; j < degree; ++j)
          prod[k - degree + j] =
              base->sub(prod[k - degree + j], base->mul(lead, modulus[j]));
      }
      prod.resize(degree, base->zero());
      return wrap(std::move(prod));
    }
  }
  throw InvariantError("bad field kind");
}

inline Element Field::inv(const Element& a) const {
  require_input(!a.is_zero(), "division by zero");
  switch (kind) {
    case FieldKind::Rationals: return wrap(mpq_class(1 / a.rational()));
    case FieldKind::Prime: return wrap(detail::invmod(a.residue(), p));
    case FieldKind::Extension: {
      // Extended Euclid in base[t] against the modulus. One leading-term
      // elimination per round; (r0,s0) and (r1,s1) each satisfy
      // s*a = r (mod modulus).
      using Poly = std::vector<Element>;
      auto len = [](const Poly& f) {
        std::size_t d = f.size();
        while (d > 0 && f[d - 1].is_zero()) --d;
        return d;  // degree + 1, or 0 for the zero polynomial
      };
      Poly r0 = modulus, r1(a.coeffs().begin(), a.coeffs().end());
      Poly s0{base->zero()}, s1{base->one()};
      while (len(r1) > 0) {
        std::size_t d1 = len(r1), d0 = len(r0);
        if (d0 < d1) {
          std::swap(r0, r1);
          std::swap(s0, s1);
          continue;
        }
        Element q = base->div(r0[d0 - 1], r1[d1 - 1]);
        std::size_t shift = d0 - d1;
        auto eliminate = [&](Poly& dst, const Poly& src) {
          if (dst.size() < src.size() + shift)
            dst.resize(src.size() + shift, base->zero());
          for (std::size_t i = 0; i < src.size(); ++i)
            dst[i + shift] = base->sub(dst[i + shift], base->mul(q, src[i]));
        };
        eliminate(r0, r1);
        eliminate(s0, s1);
      }
      std::size_t d0 = len(r0);
      require_invariant(d0 == 1, "extension modulus is not irreducible");
      Element scale = base->inv(r0[0]);
      std::vector<Element> out(degree, base->zero());
      for (std::size_t i = 0; i < s0.size(); ++i) {
        if (s0[i].is_zero()) continue;
        require_invariant(i < degree, "inverse cofactor degree too large");
        out[i] = base->mul(s0[i], scale);
      }
      return wrap(std::move(out));
    }
  }
  throw InvariantError("bad field kind");
}

inline std::optional<std::uint64_t> Field::cardinality() const {
  switch (kind) {
    case FieldKind::Rationals: return std::nullopt;
    case FieldKind::Prime: return p;
    case FieldKind::Extension: {
      auto b = base->cardinality();
      if (!b) return std::nullopt;
      return detail::checked_pow(*b, degree);
    }
  }
  return std::nullopt;
}

// Operator sugar; both operands must share a field.
inline Element operator+(const Element& a, const Element& b) {
  require_input(same_field(a.field(), b.field()), "field mismatch in +");
  return a.field()->add(a, b);
}
inline Element operator-(const Element& a, const Element& b) {
  require_input(same_field(a.field(), b.field()), "field mismatch in -");
  return a.field()->sub(a, b);
}
inline Element operator*(const Element& a, const Element& b) {
  require_input(same_field(a.field(), b.field()), "field mismatch in *");
  return a.field()->mul(a, b);
}
inline Element operator/(const Element& a, const Element& b) {
  require_input(same_field(a.field(), b.field()), "field mismatch in /");
  return a.field()->div(a, b);
}
inline Element operator-(const Element& a) { return a.field()->neg(a); }
inline Element inverse_of(const Element& a) { return a.field()->inv(a); }

// True unless the field is finite with fewer than `bound` elements.
inline bool cardinality_at_least(const FieldPtr& f, std::uint64_t bound) {
  if (!f->is_finite()) return true;
  auto c = f->cardinality();
  return !c || *c >= bound;
}

// Index -> element bijection for finite fields, little-endian over the base:
// element k of an extension has coefficient j equal to element (k/q^j) mod q
// of the base, q = |base|. This order is the tie-breaker everywhere a
// deterministic scan is required.
inline Element element_at(const FieldPtr& f, std::uint64_t idx) {
  switch (f->kind) {
    case FieldKind::Rationals:
      throw InputError("cannot enumerate an infinite field");
    case FieldKind::Prime:
      require_input(idx < f->p, "element index out of range");
      return f->from_residue(idx);
    case FieldKind::Extension: {
      std::uint64_t q = f->base->cardinality().value();
      std::vector<Element> c;
      c.reserve(f->degree);
      std::uint64_t rest = idx;
      for (std::size_t j = 0; j < f->degree; ++j) {
        c.push_back(element_at(f->base, rest % q));
        rest /= q;
      }
      require_input(rest == 0, "element index out of range");
      return f->from_coeffs(std::move(c));
    }
  }
  throw InvariantError("bad field kind");
}

// Debug rendering; JSON serialization lives in io.hpp.
inline std::string to_string(const Element& x) {
  switch (x.field()->kind) {
    case FieldKind::Rationals: return x.rational().get_str();
    case FieldKind::Prime: return std::to_string(x.residue());
    case FieldKind::Extension: {
      std::string s = "[";
      for (std::size_t i = 0; i < x.coeffs().size(); ++i) {
        if (i) s += ",";
        s += to_string(x.coeffs()[i]);
      }
      return s + "]";
    }
  }
  return "?";
}

inline std::string to_string(const FieldPtr& f) {
  switch (f->kind) {
    case FieldKind::Rationals: return "Q";
    case FieldKind::Prime: return "F" + std::to_string(f->p);
    case FieldKind::Extension: {
      std::string s = to_string(f->base) + "[t]/(";
      for (std::size_t i = 0; i < f->modulus.size(); ++i) {
        if (i) s += ",";
        s += to_string(f->modulus[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

// --- polynomials over a field (little-endian coefficient vectors) ---

inline std::size_t poly_length(const std::vector<Element>& f) {
  std::size_t d = f.size();
  while (d > 0 && f[d - 1].is_zero()) --d;
  return d;  // degree + 1, or 0 for the zero polynomial
}

inline Element poly_eval(const std::vector<Element>& f, const Element& x) {
  const FieldPtr& F = x.field();
  Element acc = F->zero();
  for (std::size_t i = f.size(); i-- > 0;) acc = acc * x + f[i];
  return acc;
}

// First root of f in the field's enumeration order, if any. Over the
// rationals only degrees <= 2 are supported (exact discriminant test); the
// root returned there is (-b - sqrt(disc)) / (2a).
inline std::optional<Element> find_root(const std::vector<Element>& f,
                                        const FieldPtr& K) {
  std::size_t dp1 = poly_length(f);
  require_input(dp1 > 0, "root search on the zero polynomial");
  if (dp1 == 1) return std::nullopt;
  if (K->is_finite()) {
    std::uint64_t card = K->cardinality().value();
    for (std::uint64_t i = 0; i < card; ++i) {
      Element x = element_at(K, i);
      if (poly_eval(f, x).is_zero()) return x;
    }
    return std::nullopt;
  }
  if (dp1 == 2) return -(f[0] / f[1]);
  require_input(K->kind == FieldKind::Rationals && dp1 == 3,
                "root search over characteristic zero supports the "
                "rationals up to degree 2 only");
  const mpq_class a = f[2].rational(), b = f[1].rational(),
                  c = f[0].rational();
  mpq_class disc = b * b - 4 * a * c;
  if (disc < 0) return std::nullopt;
  mpz_class num = disc.get_num(), den = disc.get_den();
  if (!mpz_perfect_square_p(num.get_mpz_t()) ||
      !mpz_perfect_square_p(den.get_mpz_t()))
    return std::nullopt;
  mpz_class sn, sd;
  mpz_sqrt(sn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(sd.get_mpz_t(), den.get_mpz_t());
  mpq_class s(sn, sd);
  s.canonicalize();
  return K->from_rational((-b - s) / (2 * a));
}

// Irreducibility of a monic polynomial over K. Degrees 2 and 3 reduce to
// root absence; higher degrees (finite K only) scan monic divisors of degree
// <= deg/2 in enumeration order.
inline bool is_irreducible(const std::vector<Element>& f, const FieldPtr& K) {
  std::size_t dp1 = poly_length(f);
  require_input(dp1 >= 2, "irreducibility needs degree >= 1");
  std::size_t deg = dp1 - 1;
  if (deg == 1) return true;
  require_input(f[deg].is_one(), "irreducibility test expects a monic input");
  if (deg <= 3) return !find_root(f, K).has_value();
  require_input(K->is_finite(),
                "irreducibility beyond degree 3 needs a finite field");
  if (find_root(f, K).has_value()) return false;
  std::uint64_t q = K->cardinality().value();
  for (std::size_t d = 2; d <= deg / 2; ++d) {
    auto total = detail::checked_pow(q, d);
    require_input(total && *total <= (1ull << 22),
                  "irreducibility scan beyond desk scale");
    for (std::uint64_t idx = 0; idx < *total; ++idx) {
      std::vector<Element> g;
      std::uint64_t rest = idx;
      for (std::size_t j = 0; j < d; ++j) {
        g.push_back(element_at(K, rest % q));
        rest /= q;
      }
      g.push_back(K->one());
      std::vector<Element> r(f.begin(), f.begin() + dp1);
      for (std::size_t k = r.size(); k-- > d;) {
        if (r[k].is_zero()) continue;
        Element lead = r[k];
        r[k] = K->zero();
        for (std::size_t j = 0; j < d; ++j)
          r[k - d + j] = r[k - d + j] - lead * g[j];
      }
      if (poly_length(r) == 0) return false;
    }
  }
  return true;
}

inline FieldPtr Field::extension(const FieldPtr& base,
                                 std::vector<Element> modulus) {
  require_input(base != nullptr, "extension needs a base field");
  std::size_t dp1 = poly_length(modulus);
  require_input(dp1 >= 2, "extension modulus must have degree >= 1");
  std::size_t deg = dp1 - 1;
  modulus.resize(dp1, base->zero());
  for (const auto& c : modulus)
    require_input(same_field(c.field(), base),
                  "modulus coefficients must lie in the base field");
  require_input(modulus[deg].is_one(), "extension modulus must be monic");
  if (!base->is_finite()) {
    require_input(base->kind == FieldKind::Rationals,
                  "characteristic-zero towers support one level only");
    require_input(deg <= 2,
                  "extensions of the rationals support degree <= 2 only");
  }
  require_input(is_irreducible(modulus, base),
                "extension modulus is reducible");
  auto f = std::shared_ptr<Field>(new Field());
  f->kind = FieldKind::Extension;
  f->base = base;
  f->modulus = std::move(modulus);
  f->degree = deg;
  return f;
}

inline FieldPtr make_extension(const FieldPtr& base,
                               std::vector<Element> modulus) {
  return Field::extension(base, std::move(modulus));
}

// Generator t of the top extension level (degree >= 2).
inline Element generator_of(const FieldPtr& ext) {
  require_input(
      ext->kind == FieldKind::Extension && ext->degree >= 2,
      "generator needs an extension of degree >= 2");
  std::vector<Element> c(ext->degree, ext->base->zero());
  c[1] = ext->base->one();
  return ext->from_coeffs(std::move(c));
}

// --- quadratic steps and conjugation ---

// Modulus t^2 + b t + c is separable unless char = 2 and b = 0.
inline bool quadratic_separable(const FieldPtr& ext) {
  require_input(ext->kind == FieldKind::Extension && ext->degree == 2,
                "separability check expects a quadratic extension");
  return !(ext->characteristic() == 2 && ext->modulus[1].is_zero());
}

// The nontrivial base-fixing automorphism of a separable quadratic
// K[t]/(t^2 + b t + c): t maps to the other root -b - t.
inline Element quadratic_conjugate(const Element& x) {
  const FieldPtr& E = x.field();
  require_input(E->kind == FieldKind::Extension && E->degree == 2,
                "conjugation expects a quadratic extension element");
  require_input(quadratic_separable(E), "inseparable quadratic extension");
  const Element& a0 = x.coeffs()[0];
  const Element& a1 = x.coeffs()[1];
  const Element& b = E->modulus[1];
  return E->from_coeffs({a0 - a1 * b, E->base->neg(a1)});
}

// First monic irreducible polynomial of a given degree over finite K,
// scanning coefficient tuples in enumeration order. With `separable`,
// quadratics t^2 + c in characteristic 2 are skipped.
inline std::vector<Element> first_irreducible_monic(const FieldPtr& K,
                                                    std::size_t deg,
                                                    bool separable) {
  require_input(K->is_finite(), "irreducible scan needs a finite field");
  std::uint64_t q = K->cardinality().value();
  auto total = detail::checked_pow(q, deg);
  require_input(total && *total <= (1ull << 22),
                "irreducible scan beyond desk scale");
  for (std::uint64_t idx = 0; idx < *total; ++idx) {
    std::vector<Element> g;
    std::uint64_t rest = idx;
    for (std::size_t j = 0; j < deg; ++j) {
      g.push_back(element_at(K, rest % q));
      rest /= q;
    }
    g.push_back(K->one());
    if (separable && deg == 2 && K->characteristic() == 2 && g[1].is_zero())
      continue;
    if (is_irreducible(g, K)) return g;
  }
  throw InvariantError("no irreducible polynomial of the requested degree");
}

// Minimal chain K = K_0 < K_1 < ... < K_N of separable quadratic steps with
// |K_N| >= n. Returns K_1..K_N ascending (empty when |K| >= n already).
inline std::vector<FieldPtr> build_quadratic_tower(const FieldPtr& K,
                                                   std::uint64_t n) {
  require_input(K->is_finite(), "quadratic towers need a finite base field");
  std::vector<FieldPtr> steps;
  FieldPtr cur = K;
  while (!cardinality_at_least(cur, n)) {
    auto mod = first_irreducible_monic(cur, 2, /*separable=*/true);
    cur = Field::extension(cur, std::move(mod));
    steps.push_back(cur);
  }
  return steps;
}

// --- towers, embeddings, composita ---

// Chain of fields from the absolute bottom up to f itself, inclusive.
inline std::vector<FieldPtr> tower_chain(const FieldPtr& f) {
  std::vector<FieldPtr> chain;
  FieldPtr cur = f;
  while (cur->kind == FieldKind::Extension) {
    chain.push_back(cur);
    cur = cur->base;
  }
  chain.push_back(cur);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

inline bool is_subtower(const FieldPtr& sub, const FieldPtr& super) {
  FieldPtr cur = super;
  while (true) {
    if (same_field(cur, sub)) return true;
    if (cur->kind != FieldKind::Extension) return false;
    cur = cur->base;
  }
}

// Lift an element of an ancestor field into `super` as a constant.
inline Element lift_into(const Element& x, const FieldPtr& super) {
  if (same_field(x.field(), super)) return x;
  require_input(super->kind == FieldKind::Extension,
                "element does not belong to a subfield of the target");
  std::vector<Element> c(super->degree, super->base->zero());
  c[0] = lift_into(x, super->base);
  return super->from_coeffs(std::move(c));
}

// Field homomorphism determined by generator images. The first
// `fixed_levels` entries of tower_chain(source) map by constant lift; each
// higher level's generator maps to the matching entry of gen_images.
struct Embedding {
  FieldPtr source, target;
  std::size_t fixed_levels = 1;
  std::vector<Element> gen_images;

  Element apply(const Element& x) const {
    require_input(same_field(x.field(), source),
                  "embedding applied to an element of the wrong field");
    return apply_level(x, fixed_levels + gen_images.size());
  }

 private:
  Element apply_level(const Element& x, std::size_t level) const {
    if (level <= fixed_levels) return lift_into(x, target);
    const Element& g = gen_images[level - fixed_levels - 1];
    Element acc = target->zero();
    const auto& cs = x.coeffs();
    for (std::size_t i = cs.size(); i-- > 0;)
      acc = acc * g + apply_level(cs[i], level - 1);
    return acc;
  }
};

inline Embedding identity_embedding(const FieldPtr& f) {
  return Embedding{f, f, tower_chain(f).size(), {}};
}

// Inclusion of an ancestor field into a tower built over it.
inline Embedding inclusion_embedding(const FieldPtr& sub,
                                     const FieldPtr& super) {
  require_input(is_subtower(sub, super), "not a subfield by construction");
  return Embedding{sub, super, tower_chain(sub).size(), {}};
}

// Deepest field that is a by-construction ancestor of both arguments.
inline FieldPtr common_ancestor(const FieldPtr& a, const FieldPtr& b) {
  auto ca = tower_chain(a), cb = tower_chain(b);
  require_input(same_field(ca[0], cb[0]),
                "fields do not share an absolute base");
  std::size_t i = 0;
  while (i + 1 < ca.size() && i + 1 < cb.size() &&
         same_field(ca[i + 1], cb[i + 1]))
    ++i;
  return ca[i];
}

// Embedding of `source` into `target` that extends the identity on their
// deepest common ancestor. Each level's modulus is pushed through the map
// built so far and a root is located in `target` by enumeration-order scan;
// absence of a root is an invariant error (degrees must be arranged by the
// caller).
inline Embedding embedding_fixing_ancestor(const FieldPtr& source,
                                           const FieldPtr& target) {
  FieldPtr anc = common_ancestor(source, target);
  auto chain = tower_chain(source);
  std::size_t fixed = 0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (is_subtower(chain[i], anc))
      fixed = i + 1;
    else
      break;
  }
  Embedding emb{source, target, fixed, {}};
  for (std::size_t lvl = fixed; lvl < chain.size(); ++lvl) {
    const FieldPtr& step = chain[lvl];
    Embedding partial{chain[lvl - 1], target, fixed, emb.gen_images};
    std::vector<Element> mapped;
    mapped.reserve(step->modulus.size());
    for (const auto& c : step->modulus) mapped.push_back(partial.apply(c));
    auto root = find_root(mapped, target);
    require_invariant(root.has_value(),
                      "no root for a tower level in the target field");
    emb.gen_images.push_back(*root);
  }
  return emb;
}

// Compositum of two finite towers over a shared absolute base, realized as
// an extension of `top` (by the first irreducible monic polynomial of the
// complementary degree) so that `top` includes natively and `other` embeds
// by root search fixing the deepest common ancestor.
struct Compositum {
  FieldPtr field;
  Embedding from_top;
  Embedding from_other;
};

inline Compositum compositum_embed(const FieldPtr& top,
                                   const FieldPtr& other) {
  require_input(top->is_finite() && other->is_finite(),
                "compositum needs finite fields");
  require_input(top->characteristic() == other->characteristic(),
                "compositum needs a shared characteristic");
  std::uint64_t d1 = top->total_degree(), d2 = other->total_degree();
  std::uint64_t rel = d2 / std::gcd(d1, d2);  // lcm(d1,d2) / d1
  FieldPtr M = top;
  if (rel > 1)
    M = Field::extension(
        top, first_irreducible_monic(top, rel, /*separable=*/false));
  Compositum out;
  out.field = M;
  out.from_top = inclusion_embedding(top, M);
  out.from_other = embedding_fixing_ancestor(other, M);
  return out;
}

// Coordinates of x over the subfield K along the tower between them,
// flattened depth-first (coefficient-0 block first). Length equals the
// relative degree.
inline std::vector<Element> tower_coords(const Element& x,
                                         const FieldPtr& K) {
  if (same_field(x.field(), K)) return {x};
  require_input(
      x.field()->kind == FieldKind::Extension && is_subtower(K, x.field()),
      "element does not lie in a tower over the subfield");
  std::vector<Element> out;
  for (const auto& c : x.coeffs()) {
    auto sub = tower_coords(c, K);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

}  // namespace kron
