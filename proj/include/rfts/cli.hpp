#pragma once

#include <iostream>

namespace rfts {

// Exit codes: 0 success, 1 check failure, 2 configuration or usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace rfts
