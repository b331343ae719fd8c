#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace momdp {

// Exact rational number. All probabilities, rewards, and values in the
// domain model use this type; doubles appear only inside the MILP solver.
using Rat = boost::multiprecision::mpq_rational;
using Int = boost::multiprecision::mpz_int;

// Parses "7/10", "0.7", "-3", "1e-2" style literals into an exact rational.
Rat parse_rational(const std::string& text);

// Renders as "n" or "n/d" (canonical form).
std::string rational_to_string(const Rat& value);

double to_double(const Rat& value);

// A rational extended with +infinity. Used for objective values and
// threshold coordinates; arithmetic is limited to what evaluation needs.
class ExtRat {
  public:
    ExtRat() : finite_(true), value_(0) {}
    ExtRat(Rat value) : finite_(true), value_(std::move(value)) {}
    ExtRat(int value) : finite_(true), value_(value) {}

    static ExtRat infinity() {
        ExtRat r;
        r.finite_ = false;
        return r;
    }

    bool is_finite() const { return finite_; }
    bool is_infinite() const { return !finite_; }

    const Rat& value() const {
        if (!finite_) throw std::logic_error("ExtRat: value() on infinity");
        return value_;
    }

    friend bool operator==(const ExtRat& a, const ExtRat& b) {
        if (a.finite_ != b.finite_) return false;
        return !a.finite_ || a.value_ == b.value_;
    }
    friend bool operator!=(const ExtRat& a, const ExtRat& b) { return !(a == b); }
    friend bool operator<(const ExtRat& a, const ExtRat& b) {
        if (a.finite_ && b.finite_) return a.value_ < b.value_;
        return a.finite_ && !b.finite_;
    }
    friend bool operator<=(const ExtRat& a, const ExtRat& b) { return a < b || a == b; }
    friend bool operator>(const ExtRat& a, const ExtRat& b) { return b < a; }
    friend bool operator>=(const ExtRat& a, const ExtRat& b) { return b <= a; }

    std::string to_string() const { return finite_ ? rational_to_string(value_) : "inf"; }

  private:
    bool finite_;
    Rat value_;
};

ExtRat parse_ext_rational(const std::string& text);

}  // namespace momdp
