// uldyn: exact spectral analysis of linear maps over Q_p and F_q((t)).
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "uldyn/cli_ops.hpp"

namespace {

uldyn::Json load_json(const std::string& path, int& err) {
  std::ifstream in(path);
  if (!in) {
    err = 1;
    return nullptr;
  }
  uldyn::Json j = uldyn::Json::parse(in, nullptr, false);
  if (j.is_discarded()) err = 1;
  return j;
}

void emit(const uldyn::Json& report, const std::string& out_path) {
  std::string text = report.dump(2);
  text.push_back('\n');
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    out << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact ultrametric spectral analysis"};
  app.require_subcommand(1);

  std::string out_path;
  app.add_option("--out", out_path, "write the JSON report here instead of stdout");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "run an analysis request file");
  std::string request_path;
  analyze->add_option("request", request_path, "JSON request document")->required();
  std::string field_override;
  int64_t precision_override = 0;
  long long eps_exp = -1;
  uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  analyze->add_option("--field", field_override,
                      "override the field, e.g. padic:5 or laurent:2");
  analyze->add_option("--precision", precision_override, "override the working precision");
  analyze->add_option("--epsilon-exp", eps_exp, "eps = q^-epsilon_exp for the adapted norm");
  analyze->add_option("--seed", seed, "PRNG seed recorded in the report")->each([&](auto) {
    seed_set = true;
  });
  analyze->add_option("--trials", trials, "tidiness-gap trial count");

  // corpus
  auto* corpus = app.add_subcommand("corpus", "run a corpus of example cases");
  std::string corpus_path;
  corpus->add_option("corpus", corpus_path, "JSON corpus document")->required();

  // selftest
  auto* selftest = app.add_subcommand("selftest", "run the property suites");
  uldyn::SelftestOptions opts;
  std::vector<size_t> sizes;
  selftest->add_option("--seed", opts.seed, "PRNG seed");
  selftest->add_option("--sizes", sizes, "matrix sizes (default 2 3 4)");
  selftest->add_option("--trials", opts.lattice_trials, "lattice perturbation trials");
  selftest->add_option("--matrices", opts.matrices_per_size, "matrices per field per size");
  selftest->add_option("--vectors", opts.vectors_per_matrix, "vectors per matrix");
  selftest->add_option("--precision", opts.precision, "working precision");
  selftest->add_option("--jobs", opts.jobs, "run property tasks concurrently");

  CLI11_PARSE(app, argc, argv);

  uldyn::CommandOutcome outcome;
  if (*analyze) {
    int err = 0;
    uldyn::Json req = load_json(request_path, err);
    if (err) {
      uldyn::Json rep;
      rep["error"] = {{"code", "InputError"}, {"what", "cannot read or parse " + request_path}};
      emit(rep, out_path);
      return 1;
    }
    if (!field_override.empty()) {
      auto colon = field_override.find(':');
      if (colon == std::string::npos) {
        std::cerr << "--field expects kind:q, e.g. padic:5\n";
        return 1;
      }
      uldyn::Json f;
      std::string kind = field_override.substr(0, colon);
      f["kind"] = kind;
      if (kind == "padic")
        f["p"] = std::stoul(field_override.substr(colon + 1));
      else
        f["q"] = std::stoull(field_override.substr(colon + 1));
      if (req.contains("field") && req.at("field").contains("precision"))
        f["precision"] = req.at("field").at("precision");
      if (req.contains("field") && req.at("field").contains("uniformizer"))
        f["uniformizer"] = req.at("field").at("uniformizer");
      req["field"] = f;
    }
    if (precision_override > 0) req["field"]["precision"] = precision_override;
    if (!req.contains("options")) req["options"] = uldyn::Json::object();
    if (eps_exp >= 0) req["options"]["epsilon_exp"] = eps_exp;
    if (seed_set) req["options"]["seed"] = seed;
    if (trials > 0) req["options"]["trials"] = trials;
    outcome = uldyn::run_analyze(req);
  } else if (*corpus) {
    int err = 0;
    uldyn::Json doc = load_json(corpus_path, err);
    if (err) {
      uldyn::Json rep;
      rep["error"] = {{"code", "InputError"}, {"what", "cannot read or parse " + corpus_path}};
      emit(rep, out_path);
      return 1;
    }
    outcome = uldyn::run_corpus(doc);
    // summary table on stderr, one row per case
    if (outcome.report.contains("cases")) {
      for (const auto& row : outcome.report.at("cases"))
        std::cerr << (row.at("pass").get<bool>() ? "pass  " : "FAIL  ")
                  << row.at("id").get<std::string>() << "\n";
    }
  } else {
    if (!sizes.empty()) opts.sizes = sizes;
    outcome = uldyn::run_selftest_command(opts);
  }
  emit(outcome.report, out_path);
  return outcome.exit_code;
}
