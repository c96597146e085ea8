#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace csrnn::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;  // module error or failed check
inline constexpr int kIoFailure = 2;  // missing or unwritable file

// Runs one `csrnn <command> ...` invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csrnn::cli
