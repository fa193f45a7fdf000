// Command handlers shared by the CLI binary and the test suites.
// Exit-code contract: 0 success, 1 input error, 2 precision exhaustion,
// 3 property/certification failure.
#pragma once

#include "uldyn/selftest.hpp"

namespace uldyn {

struct CommandOutcome {
  int exit_code = 0;
  Json report;
};

// run one analysis request (field + matrix + requested outputs)
CommandOutcome run_analyze(const Json& request);

// run a corpus document (array of example cases); nonzero exit iff any fail
CommandOutcome run_corpus(const Json& corpus);

CommandOutcome run_selftest_command(const SelftestOptions& opts);

}  // namespace uldyn
