#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace arw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCapped = 3;

/// args excludes the program name; args[0] is the subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Flat `key = value` file with `#` comments, or a JSON run summary (its
/// "params" object is used).
std::map<std::string, std::string> load_config_file(const std::string& path);

/// Git blob id ("blob <len>\0" + content, SHA-1) of a byte string.
std::string git_blob_hash(const std::string& content);

}  // namespace arw::cli
