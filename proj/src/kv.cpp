#include "vent/kv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "vent/errors.hpp"

namespace vent {

namespace {
std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
}  // namespace

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" +
                              line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (out.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out[key] = val;
    }
    return out;
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
    return parse_kv(read_file(path));
}

std::string format_kv(const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::ostringstream os;
    for (const auto& [k, v] : pairs) os << k << "=" << v << "\n";
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw MissingInputError("cannot open " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_file_atomic(const std::string& path, const void* data, std::size_t size) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw MissingInputError("cannot write " + tmp);
        os.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!os) throw MissingInputError("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw MissingInputError("cannot rename " + tmp + " to " + path);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    write_file_atomic(path, contents.data(), contents.size());
}

}  // namespace vent
