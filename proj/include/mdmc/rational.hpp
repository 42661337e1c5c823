#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace mdmc {

// Exact rational scalar used by every distribution, kernel and identity check.
// Arbitrary precision: partition-function products never overflow.
using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.template convert_to<double>(); }

inline Rat rat_pow(const Rat& base, unsigned exp) {
    Rat r = 1;
    for (unsigned i = 0; i < exp; ++i) r *= base;
    return r;
}

// Accepts "p", "p/q" and plain decimal strings such as "0.5".
Rat rat_parse(const std::string& s);

std::string rat_str(const Rat& r);

// Dense symmetric or square matrix of exact rationals (row-major).
class RatMatrix {
public:
    RatMatrix() = default;
    explicit RatMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n, Rat(0)) {}

    int size() const { return n_; }
    Rat& at(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    const Rat& at(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

    bool is_symmetric() const;
    // True iff every row sums to exactly 1.
    bool rows_sum_to_one() const;
    // A * ones == 0, exactly.
    bool annihilates_constants() const;

    RatMatrix transpose() const;
    RatMatrix scaled(const Rat& c) const;
    static RatMatrix identity(int n);
    RatMatrix plus(const RatMatrix& other) const;

    bool operator==(const RatMatrix& other) const { return n_ == other.n_ && a_ == other.a_; }

    // f^T A f for a rational vector.
    Rat quad(const std::vector<Rat>& f) const;

private:
    int n_ = 0;
    std::vector<Rat> a_;
};

}  // namespace mdmc
