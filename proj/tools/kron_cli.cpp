// Command-line driver: JSON in, JSON out, verdicts as exit codes.
//
// Exit codes: 0 success (or verdict matches --expect), 1 negative verdict,
// 2 malformed input, 3 internal invariant violation, 4 certificate
// verification failure. Identical input plus identical --seed produces
// byte-identical output: object keys serialize sorted, rationals reduced,
// and all randomness flows from one seeded mt19937_64 stream.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kron/kron.hpp"

namespace {

using kron::io::json;

struct Options {
  std::string input;
  std::string output;
  std::uint64_t seed = 0;
  bool trace = false;
  std::string expect;  // empty, "yes" or "no"
};

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  kron::require_input(in.good(), "cannot open input file '" + path + "'");
  return json::parse(in);
}

void write_output(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  kron::require_input(out.good(), "cannot open output file '" + path + "'");
  out << text;
}

// Exit code for a yes/no verdict, honouring --expect when given.
int verdict_exit(bool verdict, const std::string& expect) {
  if (expect.empty()) return verdict ? 0 : 1;
  return verdict == (expect == "yes") ? 0 : 1;
}

json trace_to_json(const kron::DescentTrace& trace) {
  json out = json::array();
  for (const auto& step : trace)
    out.push_back(json{{"stage", step.stage},
                       {"field", kron::io::field_to_json(step.cert.field)},
                       {"P", kron::io::matrix_to_json(step.cert.P)}});
  return out;
}

json run_reduce(const json& inst, const Options&, int& exit_code) {
  kron::Pencil p = kron::io::pencil_from_json(inst, "$");
  kron::KroneckerForm kf = kron::kronecker_reduce(p);
  exit_code = 0;
  return kron::io::kronecker_to_json(kf);
}

json run_decide_sim(const json& inst, const Options& opt, int& exit_code) {
  kron::io::FamilyPair pr = kron::io::pair_from_json(inst, "$");
  auto cert = kron::decide_similarity(pr.A, pr.B);
  json rec{{"similar", cert.has_value()}};
  if (cert) rec["certificate"] = kron::io::sim_cert_to_json(*cert);
  exit_code = verdict_exit(cert.has_value(), opt.expect);
  return rec;
}

json run_decide_equiv(const json& inst, const Options& opt, int& exit_code) {
  kron::io::FamilyPair pr = kron::io::pair_from_json(inst, "$");
  auto cert = kron::decide_equivalence(pr.A, pr.B);
  json rec{{"equivalent", cert.has_value()}};
  if (cert) {
    rec["field"] = kron::io::field_to_json(cert->field);
    rec["certificate"] = kron::io::equiv_cert_to_json(cert->P, cert->Q);
  }
  exit_code = verdict_exit(cert.has_value(), opt.expect);
  return rec;
}

json run_descend(const json& inst, const Options& opt, int& exit_code) {
  kron::io::DescendJob job = kron::io::descend_job_from_json(inst, "$");
  kron::DescentTrace trace;
  kron::SimilarityCertificate cert = kron::descend_tower(
      job.P, job.A, job.B, opt.trace ? &trace : nullptr);
  json rec{{"certificate", kron::io::sim_cert_to_json(cert)}};
  if (opt.trace) rec["trace"] = trace_to_json(trace);
  exit_code = 0;
  return rec;
}

json run_descend_equiv(const json& inst, const Options& opt, int& exit_code) {
  kron::io::DescendEquivJob job =
      kron::io::descend_equiv_job_from_json(inst, "$");
  kron::DescentTrace trace;
  kron::EquivalenceCertificate cert = kron::descend_equivalence(
      job.P, job.Q, job.A, job.B, opt.trace ? &trace : nullptr);
  json rec{{"field", kron::io::field_to_json(cert.field)},
           {"certificate", kron::io::equiv_cert_to_json(cert.P, cert.Q)}};
  if (opt.trace) rec["trace"] = trace_to_json(trace);
  exit_code = 0;
  return rec;
}

json run_verify(const json& inst, const Options&, int& exit_code) {
  kron::io::VerifyJob job = kron::io::verify_job_from_json(inst, "$");
  bool ok = job.sim ? kron::verify_similarity(job.A, job.B, job.sim->P)
                    : kron::verify_equivalence(job.A, job.B, job.equiv->P,
                                               job.equiv->Q);
  exit_code = ok ? 0 : 4;
  return json{{"verified", ok}};
}

json gen_one(kron::Rng& rng, const std::string& kind, const kron::FieldPtr& f,
             const kron::FieldPtr& ext, std::size_t n, std::size_t p,
             std::size_t m) {
  if (kind == "pencil")
    return kron::io::pencil_to_json(kron::random_pencil(rng, f, n, p));
  if (kind == "similar-pair") {
    kron::SimilarPair sp = kron::random_similar_pair(rng, f, m, n);
    json rec = kron::io::pair_to_json(sp.A, sp.B);
    rec["certificate"] = kron::io::sim_cert_to_json({f, sp.S});
    return rec;
  }
  if (kind == "equivalent-pair") {
    kron::EquivalentPair ep = kron::random_equivalent_pair(rng, f, m, n, p);
    json rec = kron::io::pair_to_json(ep.A, ep.B);
    rec["certificate"] = kron::io::equiv_cert_to_json(ep.P, ep.Q);
    return rec;
  }
  if (kind == "l-certified-pair") {
    kron::require_input(ext != nullptr,
                        "$.ext_field: l-certified-pair needs an ext_field");
    kron::CertifiedInstance ci =
        kron::random_certified_instance(rng, f, ext, m, n);
    return kron::io::descend_job_to_json({f, ext, ci.A, ci.B, ci.P});
  }
  kron::require_input(false, "$.kind: unknown generator kind '" + kind + "'");
  return {};
}

json run_gen_random(const json& req, const Options& opt, int& exit_code) {
  const json& kj = kron::io::need(req, "kind", "$");
  kron::require_input(kj.is_string(), "$.kind: generator kind must be a string");
  const std::string kind = kj.get<std::string>();
  kron::FieldPtr f =
      kron::io::field_from_json(kron::io::need(req, "field", "$"), "$.field");
  kron::FieldPtr ext;
  if (req.contains("ext_field"))
    ext = kron::io::field_from_json(req.at("ext_field"), "$.ext_field");
  std::size_t n = kron::io::size_from_json(kron::io::need(req, "n", "$"), "$.n");
  std::size_t p =
      req.contains("p") ? kron::io::size_from_json(req.at("p"), "$.p") : n;
  std::size_t m =
      req.contains("m") ? kron::io::size_from_json(req.at("m"), "$.m") : 2;
  std::size_t count = req.contains("count")
                          ? kron::io::size_from_json(req.at("count"), "$.count")
                          : 1;
  kron::Rng rng(opt.seed);
  json instances = json::array();
  for (std::size_t i = 0; i < count; ++i)
    instances.push_back(gen_one(rng, kind, f, ext, n, p, m));
  exit_code = 0;
  return json{{"instances", std::move(instances)}};
}

using Runner = json (*)(const json&, const Options&, int&);

int run_command(Runner runner, const Options& opt) {
  json input = read_json(opt.input);
  json output;
  int exit_code = 0;
  if (input.is_object() && input.contains("instances")) {
    const json& list = input.at("instances");
    kron::require_input(list.is_array(),
                        "$.instances: batch entry must be an array");
    json results = json::array();
    for (const auto& inst : list) {
      int code = 0;
      results.push_back(runner(inst, opt, code));
      exit_code = std::max(exit_code, code);
    }
    output = json{{"results", std::move(results)}};
  } else {
    output = runner(input, opt, exit_code);
  }
  write_output(output, opt.output);
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact pencil reduction, similarity/equivalence decision and "
               "certificate descent over rationals, prime fields and their "
               "extension towers"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    Runner runner;
    bool uses_seed;
  };
  const Command commands[] = {
      {"reduce-pencil",
       "Reduce a matrix pencil to weak Kronecker canonical form", run_reduce,
       false},
      {"decide-sim", "Decide simultaneous similarity of two matrix families",
       run_decide_sim, false},
      {"decide-equiv",
       "Decide simultaneous equivalence of two matrix families",
       run_decide_equiv, false},
      {"descend",
       "Descend a similarity certificate from an extension field to the "
       "family field",
       run_descend, false},
      {"descend-equiv",
       "Descend an equivalence certificate from an extension field to the "
       "family field",
       run_descend_equiv, false},
      {"verify", "Verify a similarity or equivalence certificate", run_verify,
       false},
      {"gen-random", "Generate seeded random instances from a request file",
       run_gen_random, true},
  };

  Options opt;
  Runner selected = nullptr;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--input,-i", opt.input, "input JSON file")->required();
    sub->add_option("--output,-o", opt.output,
                    "output JSON file (default: stdout)");
    if (c.uses_seed)
      sub->add_option("--seed", opt.seed, "random generator seed");
    sub->add_flag("--trace", opt.trace, "include per-stage descent trace");
    sub->add_option("--expect", opt.expect,
                    "exit 0 iff the verdict matches (yes/no)")
        ->check(CLI::IsMember({"yes", "no"}));
    sub->callback([&selected, &c]() { selected = c.runner; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run_command(selected, opt);
  } catch (const kron::CertificateError& e) {
    std::cerr << "certificate error: " << e.what() << "\n";
    return 4;
  } catch (const kron::InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const kron::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const json::parse_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
