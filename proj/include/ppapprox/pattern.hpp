#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace ppapprox {

using Point = std::vector<double>;

/// Finite multiset of points in R^D, stored row-major.
class PointPattern {
public:
    PointPattern() = default;
    explicit PointPattern(std::size_t dim) : dim_(dim) {}
    PointPattern(std::size_t dim, std::initializer_list<Point> pts) : dim_(dim) {
        for (const auto& p : pts) push_back(p);
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
    bool empty() const noexcept { return coords_.empty(); }

    std::span<const double> operator[](std::size_t i) const {
        return {coords_.data() + i * dim_, dim_};
    }

    void push_back(std::span<const double> x) {
        if (x.size() != dim_) throw std::invalid_argument("point dimension mismatch");
        coords_.insert(coords_.end(), x.begin(), x.end());
    }
    void push_back(const Point& x) { push_back(std::span<const double>(x)); }

    void reserve(std::size_t n) { coords_.reserve(n * dim_); }
    const std::vector<double>& coords() const noexcept { return coords_; }

private:
    std::size_t dim_ = 0;
    std::vector<double> coords_;
};

inline void require_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite coordinate");
}

}  // namespace ppapprox
