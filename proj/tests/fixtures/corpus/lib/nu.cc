// nu: key=value record parsing
#include <string>
#include <map>

namespace nu {

bool parse_pair(const std::string &line, std::string &key, std::string &value) {
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
        return false;
    }
    key = line.substr(0, eq);
    value = line.substr(eq + 1);
    return true;
}

std::map<std::string, std::string> parse_all(const std::vector<std::string> &lines) {
    std::map<std::string, std::string> out;
    for (const std::string &line : lines) {
        std::string k, v;
        if (parse_pair(line, k, v)) {
            out[k] = v;
        }
    }
    return out;
}

std::string get_or(const std::map<std::string, std::string> &m, const std::string &k) {
    const std::string fallback;
    auto it = m.find(k);
    if (it == m.end()) {
        return fallback;
    }
    return it->second;
}

} // namespace nu
