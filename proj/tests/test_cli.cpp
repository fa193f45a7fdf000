#include "doctest.h"

#include "uldyn/cli_ops.hpp"

using namespace uldyn;

TEST_CASE("analyze request on the standard example") {
  Json req;
  req["field"] = {{"kind", "padic"}, {"p", 5}, {"precision", 24}};
  req["matrix"] = {{"rows", 3},
                   {"cols", 3},
                   {"entries", {{"5", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1/5"}}}};
  req["outputs"] = {"decompose", "classify", "scale", "tidy"};
  req["options"] = {{"epsilon_exp", 1}, {"seed", 9}, {"trials", 25}};
  auto out = run_analyze(req);
  REQUIRE(out.exit_code == 0);
  CHECK(out.report.at("scale").at("base") == 5);
  CHECK(out.report.at("scale").at("exponent") == 1);
  CHECK(out.report.at("seed") == 9);
  CHECK(out.report.at("decomposition").at("components").size() == 3);
  CHECK(out.report.at("tidy").at("gap").at("min_observed_exponent").get<long long>() >= 1);
  CHECK(out.report.at("error").is_null());
}

TEST_CASE("analyze maps errors to the exit-code contract") {
  // malformed element: input error -> 1
  Json req;
  req["field"] = {{"kind", "padic"}, {"p", 5}, {"precision", 24}};
  req["matrix"] = {{"rows", 1}, {"cols", 1}, {"entries", {{"1//3"}}}};
  auto out = run_analyze(req);
  CHECK(out.exit_code == 1);
  CHECK(out.report.at("error").at("code") == "SyntaxError");

  // precision exhaustion -> 2 (the O(p^6) inputs cannot support the analysis)
  Json req2;
  req2["field"] = {{"kind", "padic"}, {"p", 5}, {"precision", 12}};
  Json rows = Json::array();
  rows.push_back(Json::array({"0", "-78125 + O(p^6)"}));
  rows.push_back(Json::array({"1", "750 + O(p^6)"}));
  req2["matrix"] = {{"rows", 2}, {"cols", 2}, {"entries", rows}};
  req2["outputs"] = {"decompose"};
  auto out2 = run_analyze(req2);
  CHECK(out2.exit_code == 2);
  CHECK(out2.report.at("error").at("code") == "PrecisionExhausted");

  // precision below the documented floor -> input error
  Json req3 = req;
  req3["matrix"] = {{"rows", 1}, {"cols", 1}, {"entries", {{"5"}}}};
  req3["field"]["precision"] = 2;
  CHECK(run_analyze(req3).exit_code == 1);
}

TEST_CASE("corpus handler") {
  // the shipped corpus shape passes
  Json corpus = Json::array();
  corpus.push_back({{"id", "E1.9"},
                    {"p", 5},
                    {"precision", 12},
                    {"z", "1"},
                    {"steps", 4},
                    {"expect", {{"valuations", {0, 1, 2, 3, 4}}}}});
  corpus.push_back({{"id", "E1.12"}, {"q", 2}, {"truncation", 8}});
  auto ok = run_corpus(corpus);
  CHECK(ok.exit_code == 0);
  CHECK(ok.report.at("all_pass") == true);

  // a deliberately wrong expectation fails that row and the run
  Json bad = Json::array();
  bad.push_back({{"id", "E1.9"},
                 {"p", 5},
                 {"precision", 12},
                 {"z", "1"},
                 {"steps", 2},
                 {"expect", {{"valuations", {0, 1, 7}}}}});
  auto fail = run_corpus(bad);
  CHECK(fail.exit_code == 3);
  CHECK(fail.report.at("cases").at(0).at("pass") == false);

  // empty corpus: empty table, success
  auto empty = run_corpus(Json::array());
  CHECK(empty.exit_code == 0);
  CHECK(empty.report.at("cases").empty());

  // not an array: input error
  CHECK(run_corpus(Json::object()).exit_code == 1);
}

TEST_CASE("selftest determinism across runs and job counts") {
  SelftestOptions opts;
  opts.seed = 2024;
  opts.sizes = {2};
  opts.matrices_per_size = 1;
  opts.vectors_per_matrix = 5;
  opts.lattice_trials = 3;
  std::string a = selftest_report(opts).dump(2);
  std::string b = selftest_report(opts).dump(2);
  CHECK(a == b);
  opts.jobs = 4;
  std::string c = selftest_report(opts).dump(2);
  CHECK(a == c);
  opts.jobs = 1;
  opts.seed = 2025;
  std::string d = selftest_report(opts).dump(2);
  CHECK(a != d);
}
