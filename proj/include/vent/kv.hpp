#ifndef VENT_KV_HPP
#define VENT_KV_HPP

#include <map>
#include <string>
#include <vector>

namespace vent {

// Plain key=value text files: one pair per line, '#' starts a comment.
// Used for run configs, sidecar manifests, and prune summaries.
std::map<std::string, std::string> parse_kv(const std::string& text);
std::map<std::string, std::string> read_kv_file(const std::string& path);
std::string format_kv(const std::vector<std::pair<std::string, std::string>>& pairs);

// Atomic file write: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& contents);
void write_file_atomic(const std::string& path, const void* data, std::size_t size);

std::string read_file(const std::string& path);

}  // namespace vent

#endif
