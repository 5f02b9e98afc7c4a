#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hopchain::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;
inline constexpr int kConfig = 3;
inline constexpr int kIo = 4;

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "HOPCHAIN_CONFIG";

/// Runs one command. `args` excludes the program name. Failures print a
/// single line `hopchain: error[<category>]: <message>` to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hopchain::cli
