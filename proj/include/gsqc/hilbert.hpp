#pragma once

// Product basis for M distinguishable particles, one per qubit chain of
// 2(N+1) dot sites. Per-qubit site ordinal s = 2*row + bit; the global
// index is the mixed-radix encoding with radix 2(N+1), qubit 0 least
// significant.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsqc {

struct SiteIndex {
    int qubit = 0;
    int row = 0;
    int bit = 0;
    int ordinal() const { return 2 * row + bit; }
};

/// Number of sites per qubit chain: 2(N+1).
inline std::size_t sites_per_qubit(int num_stages) {
    return 2 * (static_cast<std::size_t>(num_stages) + 1);
}

/// Dimension (2(N+1))^M of the product space; throws on index overflow.
inline std::size_t space_dim(int num_qubits, int num_stages) {
    if (num_qubits < 1) throw std::invalid_argument("space_dim: need at least one qubit");
    if (num_stages < 0) throw std::invalid_argument("space_dim: negative stage count");
    const std::size_t radix = sites_per_qubit(num_stages);
    std::size_t d = 1;
    for (int a = 0; a < num_qubits; ++a) {
        if (d > std::numeric_limits<std::size_t>::max() / radix)
            throw std::overflow_error("instance too large: (2(N+1))^M overflows the index type");
        d *= radix;
    }
    return d;
}

/// Mixed-radix encode of per-qubit site ordinals (qubit 0 least significant).
inline std::size_t encode(std::span<const int> site_ordinals, int num_stages) {
    const std::size_t radix = sites_per_qubit(num_stages);
    std::size_t g = 0;
    for (std::size_t a = site_ordinals.size(); a-- > 0;) {
        const int s = site_ordinals[a];
        if (s < 0 || static_cast<std::size_t>(s) >= radix)
            throw std::out_of_range("encode: site ordinal " + std::to_string(s) +
                                    " out of range for " + std::to_string(radix) + " sites");
        g = g * radix + static_cast<std::size_t>(s);
    }
    return g;
}

inline void decode(std::size_t g, int num_qubits, int num_stages, std::span<int> out) {
    const std::size_t radix = sites_per_qubit(num_stages);
    for (int a = 0; a < num_qubits; ++a) {
        out[static_cast<std::size_t>(a)] = static_cast<int>(g % radix);
        g /= radix;
    }
    if (g != 0) throw std::out_of_range("decode: global index out of range");
}

inline std::vector<int> decode(std::size_t g, int num_qubits, int num_stages) {
    std::vector<int> sites(static_cast<std::size_t>(num_qubits));
    decode(g, num_qubits, num_stages, sites);
    return sites;
}

/// Real amplitude vector over the product basis, carrying its (M, N) shape.
struct StateVector {
    int num_qubits = 1;
    int num_stages = 0;
    std::vector<double> amplitudes;

    static StateVector zero(int num_qubits, int num_stages) {
        StateVector s;
        s.num_qubits = num_qubits;
        s.num_stages = num_stages;
        s.amplitudes.assign(space_dim(num_qubits, num_stages), 0.0);
        return s;
    }

    std::size_t dim() const { return amplitudes.size(); }

    double squared_norm() const {
        double n2 = 0.0;
        for (double a : amplitudes) n2 += a * a;
        return n2;
    }
    double norm() const { return std::sqrt(squared_norm()); }

    void normalize() {
        const double n = norm();
        if (n == 0.0) throw std::domain_error("cannot normalize the zero vector");
        for (double& a : amplitudes) a /= n;
    }
};

/// Amplitudes of the components with every qubit at row `row`, reported
/// over bit configurations (qubit 0 = least significant bit). Unnormalized.
inline std::vector<double> project_row(const StateVector& state, int row) {
    if (row < 0 || row > state.num_stages)
        throw std::out_of_range("project_row: row out of range");
    const std::size_t radix = sites_per_qubit(state.num_stages);
    const int m = state.num_qubits;
    std::vector<std::size_t> stride(static_cast<std::size_t>(m));
    std::size_t p = 1;
    for (int a = 0; a < m; ++a) {
        stride[static_cast<std::size_t>(a)] = p;
        p *= radix;
    }
    const std::size_t configs = std::size_t{1} << m;
    std::vector<double> out(configs, 0.0);
    for (std::size_t cfg = 0; cfg < configs; ++cfg) {
        std::size_t g = 0;
        for (int a = 0; a < m; ++a) {
            const int bit = static_cast<int>((cfg >> a) & 1u);
            g += static_cast<std::size_t>(2 * row + bit) * stride[static_cast<std::size_t>(a)];
        }
        out[cfg] = state.amplitudes[g];
    }
    return out;
}

namespace detail {
inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}
inline double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }
} // namespace detail

} // namespace gsqc
