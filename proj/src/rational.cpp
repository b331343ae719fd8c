#include "momdp/rational.hpp"

#include <cctype>

namespace momdp {

namespace {

bool is_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

// digit string to integer; strips leading zeros so they are not read as octal
Int digits_to_int(std::string s) {
    size_t first = s.find_first_not_of('0');
    if (first == std::string::npos) return Int(0);
    return Int(s.substr(first));
}

}  // namespace

Rat parse_rational(const std::string& text) {
    std::string s = text;
    // strip whitespace
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    s = t;
    if (s.empty()) throw std::invalid_argument("empty rational literal");

    bool negative = false;
    if (s[0] == '+' || s[0] == '-') {
        negative = s[0] == '-';
        s = s.substr(1);
    }

    auto slash = s.find('/');
    if (slash != std::string::npos) {
        std::string num = s.substr(0, slash);
        std::string den = s.substr(slash + 1);
        if (!is_digits(num) || !is_digits(den))
            throw std::invalid_argument("bad rational literal: " + text);
        Rat r{digits_to_int(num), digits_to_int(den)};
        return negative ? Rat(-r) : r;
    }

    // decimal or integer, optional exponent: d[.d][e[-]d]
    int exp10 = 0;
    auto epos = s.find_first_of("eE");
    if (epos != std::string::npos) {
        std::string es = s.substr(epos + 1);
        s = s.substr(0, epos);
        exp10 = std::stoi(es);
    }
    std::string digits = s;
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        digits = s.substr(0, dot) + s.substr(dot + 1);
        exp10 -= static_cast<int>(s.size() - dot - 1);
    }
    if (digits.empty()) digits = "0";
    if (!is_digits(digits)) throw std::invalid_argument("bad rational literal: " + text);

    Rat r{digits_to_int(digits), Int(1)};
    for (int i = 0; i < exp10; ++i) r *= 10;
    for (int i = 0; i > exp10; --i) r /= 10;
    return negative ? Rat(-r) : r;
}

std::string rational_to_string(const Rat& value) {
    Int num = numerator(value);
    Int den = denominator(value);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

double to_double(const Rat& value) { return value.convert_to<double>(); }

ExtRat parse_ext_rational(const std::string& text) {
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t += static_cast<char>(std::tolower(c));
    if (t == "inf" || t == "infinity" || t == "+inf") return ExtRat::infinity();
    return ExtRat(parse_rational(text));
}

}  // namespace momdp
