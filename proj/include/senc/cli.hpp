#pragma once

#include <iosfwd>

namespace senc {

// Exit status: 0 success, 1 computational failure, 2 usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace senc
