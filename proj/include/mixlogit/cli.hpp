#pragma once

namespace mixlogit {

// Exit codes: 0 success, 1 input error, 2 non-convergence.
int run_cli(int argc, const char* const* argv);

}  // namespace mixlogit
