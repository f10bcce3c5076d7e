// Copyright 2025 The T2L Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "t2l/chunker.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "t2l/error.hpp"

namespace t2l {

namespace {

    // ------------------------------------------------------------------
    // Lexing
    // ------------------------------------------------------------------

    enum class TokKind { kIdent, kNumber, kString, kChar, kPunct };

    struct Token {
        TokKind kind;
        std::string text;
        long line; // 1-based
    };

    struct LexResult {
        std::vector<Token> tokens;
        std::vector<std::string> imports;
        bool ok = true;
    };

    bool is_ident_start(char c)
    {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
    }

    bool is_ident_char(char c)
    {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
    }

    // Tokenizes normalized (LF-only) source, skipping comments and whole
    // preprocessor lines. #include directives are collected per file.
    LexResult lex(const std::string& text)
    {
        LexResult res;
        size_t i = 0;
        const size_t n = text.size();
        long line = 1;
        bool at_line_start = true;

        auto advance = [&](size_t count) {
            for (size_t k = 0; k < count && i < n; ++k) {
                if (text[i] == '\n') {
                    ++line;
                    at_line_start = true;
                }
                ++i;
            }
        };

        while (i < n) {
            char c = text[i];

            if (c == '\n' || c == ' ' || c == '\t' || c == '\v' || c == '\f' || c == '\r') {
                advance(1);
                continue;
            }

            if (at_line_start && c == '#') {
                size_t start = i;
                while (i < n) {
                    size_t eol = text.find('\n', i);
                    if (eol == std::string::npos) {
                        i = n;
                        break;
                    }
                    // backslash continuation keeps the directive going
                    size_t last = eol;
                    while (last > i && (text[last - 1] == ' ' || text[last - 1] == '\t'))
                        --last;
                    bool continued = last > i && text[last - 1] == '\\';
                    ++line;
                    i = eol + 1;
                    if (!continued)
                        break;
                }
                std::string directive = text.substr(start, i - start);
                while (!directive.empty() && (directive.back() == '\n' || directive.back() == '\r'))
                    directive.pop_back();
                size_t hash = directive.find('#');
                size_t word = directive.find_first_not_of(" \t", hash + 1);
                if (word != std::string::npos && directive.compare(word, 7, "include") == 0)
                    res.imports.push_back(directive);
                at_line_start = true;
                continue;
            }
            at_line_start = false;

            if (c == '/' && i + 1 < n && text[i + 1] == '/') {
                while (i < n && text[i] != '\n')
                    ++i;
                continue;
            }
            if (c == '/' && i + 1 < n && text[i + 1] == '*') {
                advance(2);
                while (i < n && !(text[i] == '*' && i + 1 < n && text[i + 1] == '/'))
                    advance(1);
                if (i >= n) {
                    res.ok = false; // unterminated comment
                    return res;
                }
                advance(2);
                continue;
            }

            if (is_ident_start(c)) {
                size_t start = i;
                long tok_line = line;
                while (i < n && is_ident_char(text[i]))
                    ++i;
                std::string ident = text.substr(start, i - start);
                // raw string literal prefix? (R"..", u8R"..", LR"..", ...)
                if (i < n && text[i] == '"' && !ident.empty() && ident.back() == 'R'
                    && (ident == "R" || ident == "u8R" || ident == "uR" || ident == "LR" || ident == "UR")) {
                    ++i; // consume the quote
                    size_t delim_end = text.find('(', i);
                    if (delim_end == std::string::npos) {
                        res.ok = false;
                        return res;
                    }
                    std::string closer = ")" + text.substr(i, delim_end - i) + "\"";
                    size_t body = delim_end + 1;
                    size_t close = text.find(closer, body);
                    if (close == std::string::npos) {
                        res.ok = false;
                        return res;
                    }
                    line += static_cast<long>(std::count(text.begin() + static_cast<long>(start),
                        text.begin() + static_cast<long>(close), '\n'));
                    i = close + closer.size();
                    res.tokens.push_back({ TokKind::kString, "<raw>", tok_line });
                    continue;
                }
                res.tokens.push_back({ TokKind::kIdent, std::move(ident), tok_line });
                continue;
            }

            if (std::isdigit(static_cast<unsigned char>(c))
                || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
                long tok_line = line;
                size_t start = i;
                ++i;
                while (i < n) {
                    char d = text[i];
                    if (is_ident_char(d) || d == '.' || d == '\'') {
                        ++i;
                    } else if ((d == '+' || d == '-') && i > start
                        && (text[i - 1] == 'e' || text[i - 1] == 'E' || text[i - 1] == 'p' || text[i - 1] == 'P')) {
                        ++i;
                    } else {
                        break;
                    }
                }
                res.tokens.push_back({ TokKind::kNumber, text.substr(start, i - start), tok_line });
                continue;
            }

            if (c == '"' || c == '\'') {
                char quote = c;
                long tok_line = line;
                advance(1);
                bool closed = false;
                while (i < n) {
                    if (text[i] == '\\' && i + 1 < n) {
                        advance(2);
                        continue;
                    }
                    if (text[i] == quote) {
                        advance(1);
                        closed = true;
                        break;
                    }
                    if (text[i] == '\n' && quote == '\'') {
                        break; // stray quote; tolerate and move on
                    }
                    advance(1);
                }
                if (!closed && quote == '"') {
                    res.ok = false;
                    return res;
                }
                res.tokens.push_back({ quote == '"' ? TokKind::kString : TokKind::kChar, "<lit>", tok_line });
                continue;
            }

            res.tokens.push_back({ TokKind::kPunct, std::string(1, c), line });
            advance(1);
        }
        return res;
    }

    // ------------------------------------------------------------------
    // Structural scan
    // ------------------------------------------------------------------

    struct FunctionSpan {
        std::string symbol;
        long start_line;
        long end_line;
        bool is_method;
    };

    const std::unordered_set<std::string>& control_keywords()
    {
        static const std::unordered_set<std::string> kw = {
            "if", "for", "while", "switch", "catch", "return", "do", "else",
            "case", "goto", "new", "delete", "throw", "assert",
        };
        return kw;
    }

    const std::unordered_set<std::string>& non_name_keywords()
    {
        static const std::unordered_set<std::string> kw = {
            "noexcept", "alignas", "decltype", "sizeof", "alignof", "typeid",
            "__attribute__", "__declspec", "static_assert", "_Static_assert",
            "defined", "__asm__", "asm",
        };
        return kw;
    }

    struct Buffer {
        std::vector<Token> toks;
        std::vector<int> paren_match; // index of matching '(' for ')' tokens, else -1

        void push(const Token& t)
        {
            paren_match.push_back(-1);
            if (t.kind == TokKind::kPunct && t.text == ")") {
                int depth = 0;
                for (int k = static_cast<int>(toks.size()) - 1; k >= 0; --k) {
                    const Token& p = toks[static_cast<size_t>(k)];
                    if (p.kind != TokKind::kPunct)
                        continue;
                    if (p.text == ")")
                        ++depth;
                    else if (p.text == "(") {
                        if (depth == 0) {
                            paren_match.back() = k;
                            break;
                        }
                        --depth;
                    }
                }
            }
            toks.push_back(t);
        }
        void clear()
        {
            toks.clear();
            paren_match.clear();
        }
        bool empty() const { return toks.empty(); }
        size_t size() const { return toks.size(); }
    };

    bool is_punct(const Token& t, const char* s) { return t.kind == TokKind::kPunct && t.text == s; }

    int open_paren_balance(const Buffer& buf)
    {
        int bal = 0;
        for (const Token& t : buf.toks) {
            if (is_punct(t, "("))
                ++bal;
            else if (is_punct(t, ")"))
                --bal;
        }
        return bal;
    }

    bool has_top_level_assign(const Buffer& buf)
    {
        int depth = 0;
        for (size_t k = 0; k < buf.size(); ++k) {
            const Token& t = buf.toks[k];
            if (t.kind != TokKind::kPunct)
                continue;
            if (t.text == "(")
                ++depth;
            else if (t.text == ")")
                --depth;
            else if (t.text == "=" && depth == 0) {
                bool after_operator = k > 0 && buf.toks[k - 1].kind == TokKind::kIdent
                    && buf.toks[k - 1].text == "operator";
                bool cmp = (k > 0 && buf.toks[k - 1].kind == TokKind::kPunct
                               && (buf.toks[k - 1].text == "=" || buf.toks[k - 1].text == "!"
                                   || buf.toks[k - 1].text == "<" || buf.toks[k - 1].text == ">"))
                    || (k + 1 < buf.size() && is_punct(buf.toks[k + 1], "="));
                if (!after_operator && !cmp)
                    return true;
            }
        }
        return false;
    }

    bool contains_ident(const Buffer& buf, std::initializer_list<const char*> names)
    {
        for (const Token& t : buf.toks) {
            if (t.kind != TokKind::kIdent)
                continue;
            for (const char* name : names)
                if (t.text == name)
                    return true;
        }
        return false;
    }

    struct Signature {
        std::string name;
        long start_line;
    };

    // Walks the statement buffer backwards looking for `name ( params )`
    // followed only by trailing qualifiers, attribute groups or a trailing
    // return type. `limit` caps the scan (used to strip a ctor-init tail).
    std::optional<Signature> detect_signature(const Buffer& buf, size_t limit)
    {
        int k = static_cast<int>(limit) - 1;
        while (k >= 0) {
            const Token& t = buf.toks[static_cast<size_t>(k)];
            if (is_punct(t, ")")) {
                int open = buf.paren_match[static_cast<size_t>(k)];
                if (open <= 0)
                    return std::nullopt;
                int before = open - 1;
                const Token& nt = buf.toks[static_cast<size_t>(before)];
                if (nt.kind == TokKind::kIdent) {
                    if (control_keywords().count(nt.text))
                        return std::nullopt;
                    if (non_name_keywords().count(nt.text)) {
                        k = before - 1;
                        continue;
                    }
                    std::string name = nt.text;
                    int p = before - 1;
                    if (name == "operator") {
                        name = "operator()";
                    } else {
                        if (p >= 0 && is_punct(buf.toks[static_cast<size_t>(p)], "~")) {
                            name = "~" + name;
                            --p;
                        }
                        while (p >= 1 && is_punct(buf.toks[static_cast<size_t>(p)], ":")
                            && is_punct(buf.toks[static_cast<size_t>(p - 1)], ":")
                            && p >= 2 && buf.toks[static_cast<size_t>(p - 2)].kind == TokKind::kIdent) {
                            name = buf.toks[static_cast<size_t>(p - 2)].text + "::" + name;
                            p -= 3;
                        }
                    }
                    return Signature { name, buf.toks.front().line };
                }
                // `operator+(...)`, `operator[](...)` and friends: a short
                // punctuation run between "operator" and the param list.
                if (nt.kind == TokKind::kPunct) {
                    int p = before;
                    std::string ops;
                    int steps = 0;
                    while (p >= 0 && buf.toks[static_cast<size_t>(p)].kind == TokKind::kPunct && steps < 3) {
                        ops.insert(0, buf.toks[static_cast<size_t>(p)].text);
                        --p;
                        ++steps;
                    }
                    if (p >= 0 && buf.toks[static_cast<size_t>(p)].kind == TokKind::kIdent
                        && buf.toks[static_cast<size_t>(p)].text == "operator")
                        return Signature { "operator" + ops, buf.toks.front().line };
                }
                k = open - 1;
                continue;
            }
            if (t.kind == TokKind::kIdent) {
                --k;
                continue;
            }
            if (t.kind == TokKind::kPunct
                && (t.text == "&" || t.text == "*" || t.text == ">" || t.text == "<"
                    || t.text == ":" || t.text == "," || t.text == "[" || t.text == "]"
                    || t.text == "-" || t.text == ".")) {
                --k;
                continue;
            }
            return std::nullopt;
        }
        return std::nullopt;
    }

    // Index of a top-level ':' that follows a ')', i.e. the start of a
    // constructor member-initializer list. npos when absent.
    size_t ctor_colon_index(const Buffer& buf)
    {
        int depth = 0;
        for (size_t k = 0; k < buf.size(); ++k) {
            const Token& t = buf.toks[k];
            if (t.kind != TokKind::kPunct)
                continue;
            if (t.text == "(")
                ++depth;
            else if (t.text == ")")
                --depth;
            else if (t.text == ":" && depth == 0 && k > 0 && is_punct(buf.toks[k - 1], ")")) {
                bool double_colon = k + 1 < buf.size() && is_punct(buf.toks[k + 1], ":");
                if (!double_colon)
                    return k;
            }
        }
        return std::string::npos;
    }

    enum class ScopeKind { kNamespace, kClass, kFunction, kInit, kOther };

    struct Scope {
        ScopeKind kind = ScopeKind::kOther;
        long sig_start_line = 0;
        std::string name = {};
        bool is_method = false;
        bool emit = false; // function scope at chunkable depth
    };

    // Structural pass. Returns std::nullopt when the scan loses brace
    // balance; callers then retry with the line-oriented fallback.
    std::optional<std::vector<FunctionSpan>> scan_functions(const std::vector<Token>& tokens)
    {
        std::vector<FunctionSpan> spans;
        std::vector<Scope> scopes;
        Buffer buf;

        auto chunkable_context = [&]() {
            for (const Scope& s : scopes)
                if (s.kind != ScopeKind::kNamespace && s.kind != ScopeKind::kClass)
                    return false;
            return true;
        };
        auto in_class = [&]() {
            for (const Scope& s : scopes)
                if (s.kind == ScopeKind::kClass)
                    return true;
            return false;
        };

        for (size_t idx = 0; idx < tokens.size(); ++idx) {
            const Token& t = tokens[idx];

            if (is_punct(t, "{")) {
                if (!chunkable_context()) {
                    scopes.push_back(Scope { ScopeKind::kOther });
                    continue;
                }
                Scope scope { ScopeKind::kOther };
                if (buf.empty()) {
                    scope.kind = ScopeKind::kOther;
                } else if (open_paren_balance(buf) > 0) {
                    scope.kind = ScopeKind::kInit;
                } else if (size_t colon = ctor_colon_index(buf); colon != std::string::npos) {
                    const Token& prev = buf.toks.back();
                    if (is_punct(prev, ")") || is_punct(prev, "}")) {
                        if (auto sig = detect_signature(buf, colon)) {
                            scope.kind = ScopeKind::kFunction;
                            scope.sig_start_line = sig->start_line;
                            scope.name = sig->name;
                            scope.is_method = in_class();
                            scope.emit = true;
                        }
                    } else {
                        scope.kind = ScopeKind::kInit; // member-initializer brace
                        scopes.push_back(scope);
                        continue; // keep the statement buffer
                    }
                } else if (has_top_level_assign(buf)) {
                    scope.kind = ScopeKind::kInit;
                } else if (contains_ident(buf, { "namespace" })
                    || (buf.size() >= 2 && buf.toks[0].kind == TokKind::kIdent
                        && buf.toks[0].text == "extern" && buf.toks[1].kind == TokKind::kString)) {
                    scope.kind = ScopeKind::kNamespace;
                } else if (auto sig = detect_signature(buf, buf.size())) {
                    scope.kind = ScopeKind::kFunction;
                    scope.sig_start_line = sig->start_line;
                    scope.name = sig->name;
                    scope.is_method = in_class();
                    scope.emit = true;
                } else if (contains_ident(buf, { "class", "struct", "union" })) {
                    scope.kind = ScopeKind::kClass;
                } else if (contains_ident(buf, { "enum" })) {
                    scope.kind = ScopeKind::kOther;
                }
                if (scope.kind == ScopeKind::kInit) {
                    scopes.push_back(scope);
                    continue; // statement continues after the closing brace
                }
                scopes.push_back(scope);
                buf.clear();
                continue;
            }

            if (is_punct(t, "}")) {
                if (scopes.empty())
                    return std::nullopt; // unbalanced
                Scope closed = scopes.back();
                scopes.pop_back();
                if (closed.kind == ScopeKind::kInit) {
                    buf.push(t); // `= {...}` / `: member{...}` — statement continues
                    continue;
                }
                if (closed.kind == ScopeKind::kFunction && closed.emit)
                    spans.push_back({ closed.name, closed.sig_start_line, t.line, closed.is_method });
                buf.clear();
                continue;
            }

            if (!chunkable_context())
                continue;

            if (is_punct(t, ";")) {
                buf.clear();
                continue;
            }
            if (is_punct(t, ":") && buf.size() == 1 && buf.toks[0].kind == TokKind::kIdent
                && (buf.toks[0].text == "public" || buf.toks[0].text == "private"
                    || buf.toks[0].text == "protected")) {
                buf.clear();
                continue;
            }
            buf.push(t);
        }

        if (!scopes.empty())
            return std::nullopt;
        return spans;
    }

    // ------------------------------------------------------------------
    // Fallback: line-oriented brace counting for files the scanner rejects
    // ------------------------------------------------------------------

    // Strips string/char literals and comments from one line, carrying the
    // block-comment state across lines.
    std::string strip_line(const std::string& line, bool& in_block_comment)
    {
        std::string out;
        size_t i = 0;
        while (i < line.size()) {
            if (in_block_comment) {
                if (line[i] == '*' && i + 1 < line.size() && line[i + 1] == '/') {
                    in_block_comment = false;
                    i += 2;
                } else {
                    ++i;
                }
                continue;
            }
            char c = line[i];
            if (c == '/' && i + 1 < line.size() && line[i + 1] == '/')
                break;
            if (c == '/' && i + 1 < line.size() && line[i + 1] == '*') {
                in_block_comment = true;
                i += 2;
                continue;
            }
            if (c == '"' || c == '\'') {
                char quote = c;
                ++i;
                while (i < line.size()) {
                    if (line[i] == '\\') {
                        i += 2;
                        continue;
                    }
                    if (line[i] == quote) {
                        ++i;
                        break;
                    }
                    ++i;
                }
                out += quote == '"' ? 's' : 'c'; // placeholder
                continue;
            }
            out += c;
            ++i;
        }
        return out;
    }

    // `identifier ( ... ) {` with the brace ending the line.
    std::optional<std::string> fallback_signature(const std::string& stripped)
    {
        std::string s = stripped;
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
            s.pop_back();
        if (s.empty() || s.back() != '{')
            return std::nullopt;
        s.pop_back();
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
            s.pop_back();
        // allow a trailing qualifier word or two between ')' and '{'
        int guard = 0;
        while (!s.empty() && s.back() != ')' && guard < 2) {
            size_t word_start = s.find_last_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_");
            std::string word = s.substr(word_start + 1);
            if (word.empty())
                return std::nullopt;
            s.erase(word_start + 1);
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
                s.pop_back();
            ++guard;
        }
        if (s.empty() || s.back() != ')')
            return std::nullopt;
        int depth = 0;
        size_t k = s.size();
        while (k > 0) {
            --k;
            if (s[k] == ')')
                ++depth;
            else if (s[k] == '(') {
                --depth;
                if (depth == 0)
                    break;
            }
        }
        if (depth != 0 || k == 0)
            return std::nullopt;
        size_t name_end = k;
        while (name_end > 0 && std::isspace(static_cast<unsigned char>(s[name_end - 1])))
            --name_end;
        size_t name_start = name_end;
        while (name_start > 0 && is_ident_char(s[name_start - 1]))
            --name_start;
        if (name_start == name_end)
            return std::nullopt;
        std::string name = s.substr(name_start, name_end - name_start);
        if (!is_ident_start(name[0]) || control_keywords().count(name))
            return std::nullopt;
        return name;
    }

    // Directive helper for the fallback: keeps only the first branch of
    // every #if/#else group so alternative definitions cannot unbalance the
    // brace count.
    struct PpBranchFilter {
        std::vector<bool> skipping_level;

        bool skipping() const
        {
            for (bool s : skipping_level)
                if (s)
                    return true;
            return false;
        }

        // Returns true when the line was a directive (and thus has no code).
        bool feed(const std::string& line)
        {
            size_t first = line.find_first_not_of(" \t");
            if (first == std::string::npos || line[first] != '#')
                return false;
            size_t word_start = line.find_first_not_of(" \t", first + 1);
            std::string word;
            while (word_start != std::string::npos && word_start < line.size()
                && std::isalpha(static_cast<unsigned char>(line[word_start])))
                word += line[word_start++];
            if (word == "if" || word == "ifdef" || word == "ifndef")
                skipping_level.push_back(false);
            else if ((word == "else" || word == "elif") && !skipping_level.empty())
                skipping_level.back() = true;
            else if (word == "endif" && !skipping_level.empty())
                skipping_level.pop_back();
            return true;
        }
    };

    std::vector<FunctionSpan> fallback_scan(const std::vector<std::string>& lines)
    {
        std::vector<FunctionSpan> spans;
        bool in_block_comment = false;
        long depth = 0;
        std::optional<FunctionSpan> open_fn;
        long fn_close_depth = 0;
        PpBranchFilter pp;

        for (size_t ln = 0; ln < lines.size(); ++ln) {
            if (pp.feed(lines[ln]))
                continue;
            if (pp.skipping())
                continue;
            std::string stripped = strip_line(lines[ln], in_block_comment);
            if (!open_fn && depth == 0) {
                if (auto name = fallback_signature(stripped)) {
                    open_fn = FunctionSpan { *name, static_cast<long>(ln + 1), 0, false };
                    fn_close_depth = depth;
                }
            }
            for (char c : stripped) {
                if (c == '{')
                    ++depth;
                else if (c == '}') {
                    --depth;
                    if (open_fn && depth == fn_close_depth) {
                        open_fn->end_line = static_cast<long>(ln + 1);
                        spans.push_back(*open_fn);
                        open_fn.reset();
                    }
                    if (depth < 0)
                        depth = 0; // stay sane on pathological input
                }
            }
        }
        return spans;
    }

    // ------------------------------------------------------------------
    // Assembly
    // ------------------------------------------------------------------

    std::string read_file_normalized(const std::filesystem::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw IoError("cannot read " + path.string());
        std::stringstream buf;
        buf << in.rdbuf();
        std::string raw = buf.str();
        std::string out;
        out.reserve(raw.size());
        for (size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '\r') {
                out += '\n';
                if (i + 1 < raw.size() && raw[i + 1] == '\n')
                    ++i;
            } else {
                out += raw[i];
            }
        }
        return out;
    }

    void drop_overlaps(std::vector<FunctionSpan>& spans)
    {
        std::sort(spans.begin(), spans.end(), [](const FunctionSpan& a, const FunctionSpan& b) {
            if (a.start_line != b.start_line)
                return a.start_line < b.start_line;
            return a.end_line > b.end_line;
        });
        std::vector<FunctionSpan> kept;
        long covered_to = 0;
        for (auto& s : spans) {
            if (s.start_line <= covered_to)
                continue;
            covered_to = s.end_line;
            kept.push_back(std::move(s));
        }
        spans = std::move(kept);
    }

    void chunk_one_file(const std::string& rel_path, const std::string& text,
        long top_level_threshold, std::vector<Chunk>& out)
    {
        std::vector<std::string> lines = split_normalized_lines(text);
        const long line_count = static_cast<long>(lines.size());
        if (line_count == 0)
            return;

        std::vector<FunctionSpan> spans;
        std::vector<std::string> imports;
        LexResult lexed = lex(text);
        bool structural_ok = false;
        if (lexed.ok) {
            imports = lexed.imports;
            if (auto scanned = scan_functions(lexed.tokens)) {
                spans = std::move(*scanned);
                structural_ok = true;
            }
        }
        if (!structural_ok)
            spans = fallback_scan(lines);

        for (auto& s : spans) {
            s.start_line = std::clamp(s.start_line, 1L, line_count);
            s.end_line = std::clamp(s.end_line, s.start_line, line_count);
        }
        drop_overlaps(spans);

        auto slice = [&lines](long start, long end) {
            std::string src;
            for (long ln = start; ln <= end; ++ln) {
                if (ln > start)
                    src += '\n';
                src += lines[static_cast<size_t>(ln - 1)];
            }
            return src;
        };

        for (const auto& s : spans) {
            Chunk c;
            c.file_path = rel_path;
            c.chunk_kind = s.is_method ? ChunkKind::kMethod : ChunkKind::kFunction;
            c.symbol = s.symbol;
            c.start_line = s.start_line;
            c.end_line = s.end_line;
            c.source = slice(s.start_line, s.end_line);
            c.ast_type = "function_definition";
            c.imports = imports;
            out.push_back(std::move(c));
        }

        // residue regions between functions
        long cursor = 1;
        auto flush_gap = [&](long gap_start, long gap_end) {
            if (gap_end - gap_start + 1 <= top_level_threshold)
                return;
            Chunk c;
            c.file_path = rel_path;
            c.chunk_kind = ChunkKind::kTopLevel;
            c.symbol = rel_path + ":" + std::to_string(gap_start) + "-" + std::to_string(gap_end);
            c.start_line = gap_start;
            c.end_line = gap_end;
            c.source = slice(gap_start, gap_end);
            c.ast_type = "top_level";
            c.imports = imports;
            out.push_back(std::move(c));
        };
        for (const auto& s : spans) {
            if (s.start_line > cursor)
                flush_gap(cursor, s.start_line - 1);
            cursor = s.end_line + 1;
        }
        if (cursor <= line_count)
            flush_gap(cursor, line_count);
    }

} // namespace

std::string to_string(ChunkKind kind)
{
    switch (kind) {
    case ChunkKind::kFunction:
        return "function";
    case ChunkKind::kMethod:
        return "method";
    case ChunkKind::kTopLevel:
        return "top_level";
    }
    return "?";
}

std::vector<std::string> split_normalized_lines(std::string_view text)
{
    std::vector<std::string> lines;
    std::string current;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            lines.push_back(std::move(current));
            current.clear();
        } else if (c == '\n') {
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty())
        lines.push_back(std::move(current));
    return lines;
}

const Chunk* ChunkSet::lookup(const std::string& file, long line) const
{
    const Chunk* top_level_hit = nullptr;
    for (const Chunk& c : chunks) {
        if (c.file_path != file || !c.contains(line))
            continue;
        if (c.chunk_kind == ChunkKind::kTopLevel)
            top_level_hit = &c;
        else
            return &c;
    }
    return top_level_hit;
}

std::vector<const Chunk*> ChunkSet::file_chunks(const std::string& file) const
{
    std::vector<const Chunk*> out;
    for (const Chunk& c : chunks)
        if (c.file_path == file)
            out.push_back(&c);
    return out;
}

ChunkSet chunk_source_tree(const std::filesystem::path& root, const ChunkOptions& options)
{
    namespace fs = std::filesystem;
    if (!fs::exists(root) || !fs::is_directory(root))
        throw IoError("chunk root " + root.string() + " is not a directory");

    std::vector<std::string> files;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied);
    for (auto end = fs::end(it); it != end; ++it) {
        const fs::directory_entry& entry = *it;
        if (entry.is_directory()) {
            if (options.deny_dirs.count(entry.path().filename().string()))
                it.disable_recursion_pending();
            continue;
        }
        if (!entry.is_regular_file())
            continue;
        if (!options.extensions.count(entry.path().extension().string()))
            continue;
        files.push_back(fs::relative(entry.path(), root).generic_string());
    }
    std::sort(files.begin(), files.end());

    ChunkSet set;
    for (const std::string& rel : files) {
        std::string text = read_file_normalized(root / rel);
        chunk_one_file(rel, text, options.top_level_threshold, set.chunks);
    }

    std::sort(set.chunks.begin(), set.chunks.end(), [](const Chunk& a, const Chunk& b) {
        if (a.file_path != b.file_path)
            return a.file_path < b.file_path;
        return a.start_line < b.start_line;
    });
    for (size_t i = 0; i < set.chunks.size(); ++i)
        set.chunks[i].index = static_cast<int>(i);
    return set;
}

ChunkSet chunk_source_tree(const std::filesystem::path& root,
    const std::set<std::string>& extensions)
{
    ChunkOptions options;
    options.extensions = extensions;
    return chunk_source_tree(root, options);
}

NumberedSnapshot numbered_snapshot(const std::filesystem::path& root, const std::string& rel_file)
{
    std::filesystem::path path = root / rel_file;
    if (!std::filesystem::exists(path))
        throw IoError("no such file: " + path.string());
    std::string text = read_file_normalized(path);
    NumberedSnapshot snap;
    snap.file_path = rel_file;
    std::vector<std::string> lines = split_normalized_lines(text);
    snap.lines.reserve(lines.size());
    for (size_t i = 0; i < lines.size(); ++i)
        snap.lines.emplace_back(static_cast<long>(i + 1), std::move(lines[i]));
    return snap;
}

std::string chunkset_to_json(const ChunkSet& chunks)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Chunk& c : chunks.chunks) {
        nlohmann::ordered_json j;
        j["index"] = c.index;
        j["file_path"] = c.file_path;
        j["chunk_kind"] = to_string(c.chunk_kind);
        j["symbol"] = c.symbol;
        j["start_line"] = c.start_line;
        j["end_line"] = c.end_line;
        j["source"] = c.source;
        j["ast_type"] = c.ast_type;
        j["imports"] = c.imports;
        j["diff"] = c.diff;
        j["diff_hit_lines"] = c.diff_hit_lines;
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

ChunkSet chunkset_from_json(std::string_view text)
{
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
        throw ParseError("chunk set: expected a JSON array");
    ChunkSet set;
    for (const auto& j : doc) {
        Chunk c;
        c.index = j.at("index").get<int>();
        c.file_path = j.at("file_path").get<std::string>();
        std::string kind = j.at("chunk_kind").get<std::string>();
        if (kind == "function")
            c.chunk_kind = ChunkKind::kFunction;
        else if (kind == "method")
            c.chunk_kind = ChunkKind::kMethod;
        else if (kind == "top_level")
            c.chunk_kind = ChunkKind::kTopLevel;
        else
            throw ParseError("chunk set: bad chunk_kind \"" + kind + "\"");
        c.symbol = j.at("symbol").get<std::string>();
        c.start_line = j.at("start_line").get<long>();
        c.end_line = j.at("end_line").get<long>();
        c.source = j.at("source").get<std::string>();
        c.ast_type = j.at("ast_type").get<std::string>();
        c.imports = j.value("imports", std::vector<std::string>());
        c.diff = j.value("diff", false);
        c.diff_hit_lines = j.value("diff_hit_lines", std::vector<long>());
        set.chunks.push_back(std::move(c));
    }
    return set;
}

} // namespace t2l
