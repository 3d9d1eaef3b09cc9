#pragma once

#include <ostream>

namespace coc {

// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal error. Errors go to
// `err` as one line of JSON.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace coc
