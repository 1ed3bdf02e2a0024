#include "liouville/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "liouville/errors.hpp"

namespace liouville {

double config_value::number() const {
    if (!is_number()) throw config_error("config value is not a number");
    return std::get<double>(data_);
}

const std::string& config_value::text() const {
    if (!is_text()) throw config_error("config value is not a string");
    return std::get<std::string>(data_);
}

const config_value::array& config_value::items() const {
    if (!is_array()) throw config_error("config value is not an array");
    return std::get<array>(data_);
}

namespace {

struct cursor {
    const std::string& s;
    std::size_t pos = 0;
    const std::string& origin;
    int line;

    bool done() const { return pos >= s.size(); }
    char peek() const { return s[pos]; }
    void skip_ws() {
        while (!done() && std::isspace(static_cast<unsigned char>(s[pos])))
            ++pos;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw config_error(origin + ":" + std::to_string(line) + ": " + msg);
    }
};

config_value parse_value(cursor& c);

config_value parse_array(cursor& c) {
    // c.peek() == '['
    ++c.pos;
    config_value::array items;
    while (true) {
        c.skip_ws();
        if (c.done()) c.fail("unterminated array");
        if (c.peek() == ']') {
            ++c.pos;
            break;
        }
        items.push_back(parse_value(c));
        c.skip_ws();
        if (c.done()) c.fail("unterminated array");
        if (c.peek() == ',') {
            ++c.pos;
        } else if (c.peek() != ']') {
            c.fail("expected ',' or ']' in array");
        }
    }
    return config_value(std::move(items));
}

config_value parse_value(cursor& c) {
    c.skip_ws();
    if (c.done()) c.fail("missing value");
    const char ch = c.peek();
    if (ch == '[') return parse_array(c);
    if (ch == '"') {
        ++c.pos;
        std::string out;
        while (!c.done() && c.peek() != '"') out.push_back(c.s[c.pos++]);
        if (c.done()) c.fail("unterminated string");
        ++c.pos;
        return config_value(std::move(out));
    }
    // Bare token: number if it parses fully, string otherwise.
    std::size_t start = c.pos;
    while (!c.done() && !std::isspace(static_cast<unsigned char>(c.peek())) &&
           c.peek() != ',' && c.peek() != ']')
        ++c.pos;
    std::string tok = c.s.substr(start, c.pos - start);
    if (tok.empty()) c.fail("empty value");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end && *end == '\0') return config_value(v);
    return config_value(std::move(tok));
}

std::string strip_comment(const std::string& line) {
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quote = !in_quote;
        if (line[i] == '#' && !in_quote) return line.substr(0, i);
    }
    return line;
}

int bracket_balance(const std::string& s) {
    int depth = 0;
    bool in_quote = false;
    for (char ch : s) {
        if (ch == '"') in_quote = !in_quote;
        if (in_quote) continue;
        if (ch == '[') ++depth;
        if (ch == ']') --depth;
    }
    return depth;
}

}  // namespace

config config::parse_string(const std::string& text,
                            const std::string& origin) {
    config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const int start_line = lineno;
        std::string logical = strip_comment(line);
        // Continue logical line while brackets are open.
        while (bracket_balance(logical) > 0) {
            std::string next;
            if (!std::getline(in, next))
                throw config_error(origin + ":" + std::to_string(start_line) +
                                   ": unbalanced '[' at end of file");
            ++lineno;
            logical += " " + strip_comment(next);
        }
        if (bracket_balance(logical) < 0)
            throw config_error(origin + ":" + std::to_string(start_line) +
                               ": unbalanced ']'");

        std::size_t p = logical.find_first_not_of(" \t\r");
        if (p == std::string::npos) continue;
        const std::size_t eq = logical.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(start_line) +
                               ": expected 'key = value'");
        std::string key = logical.substr(p, eq - p);
        while (!key.empty() &&
               std::isspace(static_cast<unsigned char>(key.back())))
            key.pop_back();
        if (key.empty())
            throw config_error(origin + ":" + std::to_string(start_line) +
                               ": empty key");

        std::string rhs = logical.substr(eq + 1);
        cursor c{rhs, 0, origin, start_line};
        config_value v = parse_value(c);
        c.skip_ws();
        if (!c.done()) c.fail("trailing characters after value");
        if (cfg.entries_.count(key))
            throw config_error(origin + ":" + std::to_string(start_line) +
                               ": duplicate key '" + key + "'");
        cfg.entries_.emplace(std::move(key), std::move(v));
    }
    return cfg;
}

config config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

bool config::has(const std::string& key) const {
    return entries_.count(key) > 0;
}

const config_value& config::raw(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
        throw config_error(origin_ + ": missing key '" + key + "'");
    return it->second;
}

double config::number(const std::string& key) const {
    try {
        return raw(key).number();
    } catch (const config_error&) {
        throw config_error(origin_ + ": key '" + key + "' must be a number");
    }
}

double config::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::string config::text(const std::string& key) const {
    try {
        return raw(key).text();
    } catch (const config_error&) {
        throw config_error(origin_ + ": key '" + key + "' must be a string");
    }
}

std::string config::text_or(const std::string& key,
                            const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
}

std::vector<double> config::numbers(const std::string& key) const {
    const auto& items = raw(key).items();
    std::vector<double> out;
    out.reserve(items.size());
    for (const auto& v : items) {
        if (!v.is_number())
            throw config_error(origin_ + ": key '" + key +
                               "' must be an array of numbers");
        out.push_back(v.number());
    }
    return out;
}

std::vector<double> config::numbers_or(
    const std::string& key, const std::vector<double>& fallback) const {
    return has(key) ? numbers(key) : fallback;
}

std::vector<std::vector<double>> config::rows(const std::string& key) const {
    const auto& items = raw(key).items();
    std::vector<std::vector<double>> out;
    for (const auto& row : items) {
        if (!row.is_array())
            throw config_error(origin_ + ": key '" + key +
                               "' must be an array of arrays");
        std::vector<double> r;
        for (const auto& v : row.items()) {
            if (!v.is_number())
                throw config_error(origin_ + ": key '" + key +
                                   "' must contain numbers");
            r.push_back(v.number());
        }
        out.push_back(std::move(r));
    }
    return out;
}

Eigen::MatrixXd config::matrix(const std::string& key) const {
    const auto r = rows(key);
    if (r.empty()) throw config_error(origin_ + ": empty matrix '" + key + "'");
    const std::size_t cols = r.front().size();
    for (const auto& row : r)
        if (row.size() != cols)
            throw config_error(origin_ + ": ragged matrix '" + key + "'");
    Eigen::MatrixXd m(r.size(), cols);
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = r[i][j];
    return m;
}

}  // namespace liouville
