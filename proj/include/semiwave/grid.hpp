#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "semiwave/errors.hpp"

namespace semiwave {

/// Uniform spatial grid: points x_j = x_min + j dx, j = 0..n-1, with
/// dx = (x_max - x_min)/n. For periodic grids x_max identifies with x_min;
/// the spectral backend additionally needs n to be a power of two.
struct GridSpec {
    double x_min = 0.0;
    double x_max = 1.0;
    std::size_t n = 0;
    bool periodic = false;

    double dx() const { return (x_max - x_min) / static_cast<double>(n); }
    double x(std::size_t j) const { return x_min + dx() * static_cast<double>(j); }

    void validate() const {
        if (n < 8) throw ConfigError("GridSpec: n >= 8 required");
        if (!(x_max > x_min)) throw ConfigError("GridSpec: x_max > x_min required");
    }
};

/// Grid for a co-moving solve with delay shift c*h: dx is chosen from a
/// requested dx0 so that the shift is an exact number of cells.
inline GridSpec make_shift_aligned_grid(double x_min, double x_max, double dx0,
                                        double c, double h, bool periodic = false) {
    const double shift = c * h;
    GridSpec g;
    g.x_min = x_min;
    g.periodic = periodic;
    double dx = dx0;
    if (shift > 0.0) {
        const double cells = std::max(1.0, std::round(shift / dx0));
        dx = shift / cells;
    }
    g.n = static_cast<std::size_t>(std::ceil((x_max - x_min) / dx - 1e-9));
    g.x_max = x_min + dx * static_cast<double>(g.n);
    g.validate();
    return g;
}

/// Ring buffer of n_delay+1 spatial slices spanning exactly one delay
/// interval [t-h, t]; slice spacing is dt = h/n_delay and the newest slice is
/// the field at the current time.
class HistoryField {
public:
    HistoryField() = default;

    HistoryField(std::size_t n_points, std::size_t n_delay, double dt, double t0)
        : n_points_(n_points),
          n_delay_(n_delay),
          dt_(dt),
          t_(t0),
          start_(0),
          data_((n_delay + 1) * n_points, 0.0) {}

    /// Samples fn(s, x) for s = -h + j dt over the grid.
    static HistoryField sample(const GridSpec& grid, double h, std::size_t n_delay,
                               const std::function<double(double, double)>& fn) {
        if (n_delay < 1) throw ConfigError("HistoryField: n_delay >= 1 required");
        HistoryField f(grid.n, n_delay, h / static_cast<double>(n_delay), 0.0);
        for (std::size_t j = 0; j <= n_delay; ++j) {
            const double s = (static_cast<double>(j) - static_cast<double>(n_delay)) *
                             f.dt_;
            double* row = f.row(j);
            for (std::size_t i = 0; i < grid.n; ++i) row[i] = fn(s, grid.x(i));
        }
        return f;
    }

    std::size_t n_points() const { return n_points_; }
    std::size_t n_delay() const { return n_delay_; }
    double dt() const { return dt_; }
    double t() const { return t_; }

    /// j = 0 is the oldest slice (time t-h), j = n_delay the newest (time t).
    std::span<const double> slice(std::size_t j) const {
        return {row(j), n_points_};
    }
    std::span<double> slice(std::size_t j) { return {row(j), n_points_}; }
    std::span<const double> newest() const { return slice(n_delay_); }

    /// Overwrites the oldest slice with next and advances t by dt.
    void push(std::span<const double> next) {
        double* dst = data_.data() + start_ * n_points_;
        std::copy(next.begin(), next.end(), dst);
        start_ = (start_ + 1) % (n_delay_ + 1);
        t_ += dt_;
    }

    /// Translates every slice by k cells (positive k moves content toward
    /// larger x). Vacated cells take fill_left / fill_right.
    void shift_cells(long k, double fill_left, double fill_right) {
        if (k == 0) return;
        for (std::size_t j = 0; j <= n_delay_; ++j) {
            double* r = row(j);
            if (k > 0) {
                for (long i = static_cast<long>(n_points_) - 1; i >= k; --i)
                    r[i] = r[i - k];
                for (long i = 0; i < k; ++i) r[i] = fill_left;
            } else {
                const long m = -k;
                for (long i = 0; i + m < static_cast<long>(n_points_); ++i)
                    r[i] = r[i + m];
                for (long i = static_cast<long>(n_points_) - m;
                     i < static_cast<long>(n_points_); ++i)
                    r[i] = fill_right;
            }
        }
    }

private:
    double* row(std::size_t j) {
        return data_.data() + ((start_ + j) % (n_delay_ + 1)) * n_points_;
    }
    const double* row(std::size_t j) const {
        return data_.data() + ((start_ + j) % (n_delay_ + 1)) * n_points_;
    }

    std::size_t n_points_ = 0;
    std::size_t n_delay_ = 0;
    double dt_ = 0.0;
    double t_ = 0.0;
    std::size_t start_ = 0;
    std::vector<double> data_;
};

}  // namespace semiwave
