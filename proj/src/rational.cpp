#include "mdmc/rational.hpp"

namespace mdmc {

Rat rat_parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Int p(s.substr(0, slash));
        Int q(s.substr(slash + 1));
        if (q == 0) throw std::invalid_argument("rational with zero denominator: " + s);
        return Rat(p, q);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        size_t frac_len = s.size() - dot - 1;
        Int p(digits);
        Int q = 1;
        for (size_t i = 0; i < frac_len; ++i) q *= 10;
        return Rat(p, q);
    }
    return Rat(Int(s));
}

std::string rat_str(const Rat& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

bool RatMatrix::is_symmetric() const {
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j)
            if (at(i, j) != at(j, i)) return false;
    return true;
}

bool RatMatrix::rows_sum_to_one() const {
    for (int i = 0; i < n_; ++i) {
        Rat s = 0;
        for (int j = 0; j < n_; ++j) s += at(i, j);
        if (s != 1) return false;
    }
    return true;
}

bool RatMatrix::annihilates_constants() const {
    for (int i = 0; i < n_; ++i) {
        Rat s = 0;
        for (int j = 0; j < n_; ++j) s += at(i, j);
        if (s != 0) return false;
    }
    return true;
}

RatMatrix RatMatrix::transpose() const {
    RatMatrix t(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) t.at(j, i) = at(i, j);
    return t;
}

RatMatrix RatMatrix::scaled(const Rat& c) const {
    RatMatrix t(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) t.at(i, j) = at(i, j) * c;
    return t;
}

RatMatrix RatMatrix::identity(int n) {
    RatMatrix t(n);
    for (int i = 0; i < n; ++i) t.at(i, i) = 1;
    return t;
}

RatMatrix RatMatrix::plus(const RatMatrix& other) const {
    if (other.n_ != n_) throw std::invalid_argument("matrix size mismatch");
    RatMatrix t(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) t.at(i, j) = at(i, j) + other.at(i, j);
    return t;
}

Rat RatMatrix::quad(const std::vector<Rat>& f) const {
    if (static_cast<int>(f.size()) != n_) throw std::invalid_argument("vector size mismatch");
    Rat total = 0;
    for (int i = 0; i < n_; ++i) {
        Rat row = 0;
        for (int j = 0; j < n_; ++j) row += at(i, j) * f[j];
        total += f[i] * row;
    }
    return total;
}

}  // namespace mdmc
