#include "momdp/lp_format.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace momdp {

namespace {

std::string sanitize(const std::string& name, int id) {
    std::string out;
    for (char c : name)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out = "v" + out;
    return out + "_" + std::to_string(id);
}

// exact when the denominator is a product of 2s and 5s
bool decimal_exact(const Rat& r) {
    Int d = denominator(r);
    for (Int f : {Int(2), Int(5)})
        while (d % f == 0) d /= f;
    return d == 1;
}

std::string decimal(const Rat& r) {
    if (denominator(r) == 1) return numerator(r).str();
    std::ostringstream os;
    os.precision(17);
    os << to_double(r);
    return os.str();
}

std::string term_string(const Rat& coef, const std::string& var, bool first,
                        bool rational_form) {
    std::string c = rational_form ? rational_to_string(coef < 0 ? Rat(-coef) : coef)
                                  : decimal(coef < 0 ? Rat(-coef) : coef);
    std::string sign = coef < 0 ? (first ? "- " : " - ") : (first ? "" : " + ");
    return sign + c + " " + var;
}

std::string expr_string(const LinExpr& expr, const std::vector<std::string>& names,
                        bool rational_form) {
    if (expr.empty()) return "0 ";
    std::string out;
    bool first = true;
    for (const auto& t : expr) {
        if (t.coef == 0) continue;
        out += term_string(t.coef, names[t.var], first, rational_form);
        first = false;
    }
    if (out.empty()) out = "0 ";
    return out;
}

bool expr_needs_comment(const LinExpr& expr, const Rat& rhs) {
    if (!decimal_exact(rhs)) return true;
    for (const auto& t : expr)
        if (!decimal_exact(t.coef)) return true;
    return false;
}

}  // namespace

std::string export_lp(const MilpModel& model) {
    std::vector<std::string> names;
    for (const auto& v : model.vars) names.push_back(sanitize(v.name, v.id));

    std::ostringstream os;
    if (model.objective) {
        os << "Maximize\n obj: " << expr_string(*model.objective, names, false) << "\n";
    } else {
        os << "Minimize\n obj: 0\n";
    }
    os << "Subject To\n";
    for (size_t i = 0; i < model.constraints.size(); ++i) {
        const auto& c = model.constraints[i];
        std::string cname = c.name.empty() ? "c" + std::to_string(i) : sanitize(c.name, static_cast<int>(i));
        const char* rel = c.cmp == Cmp::Le ? "<=" : (c.cmp == Cmp::Ge ? ">=" : "=");
        os << " " << cname << ": " << expr_string(c.expr, names, false) << rel << " "
           << decimal(c.rhs) << "\n";
        if (expr_needs_comment(c.expr, c.rhs))
            os << "\\ exact " << cname << ": " << expr_string(c.expr, names, true) << rel << " "
               << rational_to_string(c.rhs) << "\n";
    }
    os << "Bounds\n";
    for (const auto& v : model.vars) {
        if (v.kind == VarKind::Binary) continue;
        os << " " << decimal(v.lower) << " <= " << names[v.id] << " <= " << decimal(v.upper)
           << "\n";
        if (!decimal_exact(v.lower) || !decimal_exact(v.upper))
            os << "\\ exact " << rational_to_string(v.lower) << " <= " << names[v.id]
               << " <= " << rational_to_string(v.upper) << "\n";
    }
    bool any_binary = false;
    for (const auto& v : model.vars)
        if (v.kind == VarKind::Binary) any_binary = true;
    if (any_binary) {
        os << "Binaries\n";
        for (const auto& v : model.vars)
            if (v.kind == VarKind::Binary) os << " " << names[v.id] << "\n";
    }
    os << "End\n";
    return os.str();
}

namespace {

struct Token {
    std::string text;
};

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] == '\\') continue;  // comment
        std::string cur;
        auto flush = [&] {
            if (!cur.empty()) {
                tokens.push_back(cur);
                cur.clear();
            }
        };
        for (size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                flush();
            } else if (c == ':' || c == '+') {
                flush();
                tokens.push_back(std::string(1, c));
            } else if (c == '<' || c == '>' || c == '=') {
                flush();
                if ((c == '<' || c == '>') && i + 1 < line.size() && line[i + 1] == '=') {
                    tokens.push_back(std::string(1, c) + "=");
                    ++i;
                } else {
                    tokens.push_back(std::string(1, c));
                }
            } else if (c == '-') {
                flush();
                tokens.push_back("-");
            } else {
                cur += c;
            }
        }
        flush();
    }
    return tokens;
}

bool is_number(const std::string& t) {
    return !t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) || t[0] == '.');
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

MilpModel parse_lp(const std::string& text) {
    auto tokens = tokenize(text);
    size_t pos = 0;
    auto peek = [&]() -> std::string { return pos < tokens.size() ? tokens[pos] : ""; };
    auto next = [&]() -> std::string { return pos < tokens.size() ? tokens[pos++] : ""; };

    enum class Section { None, Objective, Constraints, Bounds, Binaries, End };
    auto section_of = [](const std::string& t) -> std::optional<Section> {
        std::string s = lower(t);
        if (s == "maximize" || s == "minimize") return Section::Objective;
        if (s == "subject") return Section::Constraints;
        if (s == "bounds") return Section::Bounds;
        if (s == "binaries" || s == "binary") return Section::Binaries;
        if (s == "end") return Section::End;
        return std::nullopt;
    };

    MilpModel model;
    std::map<std::string, int> var_ids;
    auto var_of = [&](const std::string& name) {
        auto it = var_ids.find(name);
        if (it != var_ids.end()) return it->second;
        int id = model.add_continuous(name, Rat(0), Rat(0));
        var_ids[name] = id;
        return id;
    };

    // expression parser: [name :] terms (rel rhs)?
    auto parse_expr = [&](LinExpr& expr, Cmp* cmp, Rat* rhs) {
        // optional label
        if (pos + 1 < tokens.size() && tokens[pos + 1] == ":") pos += 2;
        bool done = false;
        while (!done) {
            Rat sign(1);
            while (peek() == "+" || peek() == "-") {
                if (next() == "-") sign = -sign;
            }
            std::string t = peek();
            if (t.empty() || section_of(t)) break;
            if (t == "<=" || t == ">=" || t == "=") {
                std::string rel = next();
                if (cmp) *cmp = rel == "<=" ? Cmp::Le : (rel == ">=" ? Cmp::Ge : Cmp::Eq);
                if (rhs) *rhs = parse_rational(next());
                done = true;
                break;
            }
            Rat coef = sign;
            if (is_number(t)) {
                coef = sign * parse_rational(next());
                t = peek();
            }
            if (t.empty() || section_of(t) || t == "<=" || t == ">=" || t == "=") {
                // bare constant term (e.g. "0"); ignore in the expression
                continue;
            }
            expr.push_back({var_of(next()), coef});
        }
    };

    bool maximize = true;
    Section section = Section::None;
    while (pos < tokens.size()) {
        std::string t = peek();
        auto s = section_of(t);
        if (s) {
            section = *s;
            if (section == Section::Objective) maximize = lower(t) == "maximize";
            next();
            if (section == Section::Constraints) next();  // "To"
            if (section == Section::End) break;
            if (section == Section::Objective) {
                LinExpr obj;
                parse_expr(obj, nullptr, nullptr);
                if (maximize && !obj.empty()) model.maximize(std::move(obj));
            }
            continue;
        }
        switch (section) {
            case Section::Constraints: {
                LinExpr expr;
                Cmp cmp = Cmp::Le;
                Rat rhs(0);
                parse_expr(expr, &cmp, &rhs);
                model.add_constraint(std::move(expr), cmp, std::move(rhs));
                break;
            }
            case Section::Bounds: {
                // lo <= name <= up
                Rat sign(1);
                while (peek() == "-") {
                    next();
                    sign = -sign;
                }
                Rat lo = sign * parse_rational(next());
                next();  // <=
                std::string name = next();
                next();  // <=
                Rat sign2(1);
                while (peek() == "-") {
                    next();
                    sign2 = -sign2;
                }
                Rat up = sign2 * parse_rational(next());
                int id = var_of(name);
                model.vars[id].lower = lo;
                model.vars[id].upper = up;
                break;
            }
            case Section::Binaries: {
                int id = var_of(next());
                model.vars[id].kind = VarKind::Binary;
                model.vars[id].lower = 0;
                model.vars[id].upper = 1;
                break;
            }
            default:
                next();
                break;
        }
    }
    return model;
}

}  // namespace momdp
