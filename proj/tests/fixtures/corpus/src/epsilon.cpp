// epsilon: tokenizer scraps
#include <string>
#include <vector>

namespace eps {

std::vector<std::string> split_ws(const std::string &text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n') {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) {
        out.push_back(cur);
    }
    return out;
}

bool is_number(const std::string &tok) {
    if (tok.empty()) {
        return false;
    }
    for (char c : tok) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    return true;
}

int parse_or(const std::string &tok, int fallback) {
    if (!is_number(tok)) {
        return fallback;
    }
    return std::stoi(tok);
}

} // namespace eps
