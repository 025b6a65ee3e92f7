#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace teamq {

// Exit status: 0 true/holds, 1 false/fails, 2 usage or input error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace teamq
