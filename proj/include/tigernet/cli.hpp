#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tigernet {

inline constexpr const char* kLibraryVersion = "1.0.0";
// Bumped whenever the VOC, detections JSONL, placement JSONL or
// architecture config layouts change.
inline constexpr const char* kFormatSchemaVersion = "1";

namespace cli {

/// Run one command line (without the program name). Returns the process
/// exit code: 0 success, 1 domain error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cli
}  // namespace tigernet
