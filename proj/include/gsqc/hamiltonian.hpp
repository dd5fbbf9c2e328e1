#pragma once

// Assembly of the real-symmetric sparse Hamiltonian for a circuit.
//
// Each single-gate stage contributes, for qubit q at stage j,
//
//   h = eps [ n(j-1,0) + n(j-1,1) + n(j,0) + n(j,1)
//             - sum_{b,b'} U(b,b') ( c+(j,b) c(j-1,b') + transpose ) ],
//
// a rank-2 PSD block coupling rows j-1 and j of that qubit's chain. A
// controlled stage contributes four terms: a penalty for the control
// sitting at row j-1 while the target is already at row j; the control's
// identity block gated on the target at row j-1; and the target's
// u_on_0 / u_on_1 blocks gated on the control's arrival bit at row j.
// An input bias raises each qubit's wrong row-0 dot by delta.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "gsqc/circuit.hpp"
#include "gsqc/hilbert.hpp"

namespace gsqc {

struct BiasSpec {
    std::vector<int> input_bits; // one 0/1 per qubit, qubit 0 first
    double delta = 0.1;          // on-site energy added to the wrong row-0 dot
};

inline BiasSpec bias_for_input(unsigned input, int num_qubits, double delta) {
    BiasSpec b;
    b.delta = delta;
    b.input_bits.resize(static_cast<std::size_t>(num_qubits));
    for (int a = 0; a < num_qubits; ++a)
        b.input_bits[static_cast<std::size_t>(a)] = static_cast<int>((input >> a) & 1u);
    return b;
}

struct Triplet {
    std::size_t row, col;
    double value;
};

/// Real symmetric sparse operator. Canonical storage is the merged,
/// lexicographically sorted upper triangle (incl. diagonal); a compressed
/// row form of the full symmetrized matrix backs matvec. Matvec traverses
/// rows ascending and columns ascending within a row.
class SparseSymMatrix {
public:
    SparseSymMatrix() = default;

    /// Builds from coordinate entries with row <= col. Duplicates are merged
    /// by summation in emission order; merged entries with |value| < drop_tol
    /// are discarded.
    static SparseSymMatrix from_triplets(std::size_t dim, std::vector<Triplet> triplets,
                                         double drop_tol) {
        for (const Triplet& t : triplets) {
            if (t.row > t.col)
                throw std::invalid_argument("SparseSymMatrix: lower-triangle entry");
            if (t.col >= dim) throw std::invalid_argument("SparseSymMatrix: index out of range");
        }
        // stable sort keeps emission order within duplicates, so the merge
        // sums in a reproducible order
        std::stable_sort(triplets.begin(), triplets.end(),
                         [](const Triplet& a, const Triplet& b) {
                             return a.row != b.row ? a.row < b.row : a.col < b.col;
                         });
        SparseSymMatrix m;
        m.dim_ = dim;
        for (std::size_t i = 0; i < triplets.size();) {
            std::size_t j = i;
            double sum = 0.0;
            while (j < triplets.size() && triplets[j].row == triplets[i].row &&
                   triplets[j].col == triplets[i].col)
                sum += triplets[j++].value;
            if (std::abs(sum) >= drop_tol)
                m.upper_.push_back({triplets[i].row, triplets[i].col, sum});
            i = j;
        }
        m.build_csr();
        return m;
    }

    std::size_t dim() const { return dim_; }
    std::size_t nnz_upper() const { return upper_.size(); }
    std::span<const Triplet> upper_entries() const { return upper_; }

    /// y = H x over the symmetrized matrix.
    void matvec(std::span<const double> x, std::span<double> y) const {
        if (x.size() != dim_ || y.size() != dim_)
            throw std::invalid_argument("matvec: dimension mismatch");
        for (std::size_t r = 0; r < dim_; ++r) {
            double acc = 0.0;
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                acc += val_[k] * x[col_[k]];
            y[r] = acc;
        }
    }

    std::vector<double> matvec(std::span<const double> x) const {
        std::vector<double> y(dim_);
        matvec(x, y);
        return y;
    }

    /// Residual norm ||H x|| / ||x||.
    double relative_residual(std::span<const double> x) const {
        std::vector<double> y(dim_);
        matvec(x, y);
        return detail::norm(y) / detail::norm(x);
    }

    /// Text dump: one `i j value` line per upper-triangle entry, sorted
    /// lexicographically, full-precision scientific notation.
    void dump(std::ostream& os) const {
        char buf[96];
        for (const Triplet& t : upper_) {
            std::snprintf(buf, sizeof(buf), "%zu %zu %.17e\n", t.row, t.col, t.value);
            os << buf;
        }
    }

private:
    void build_csr() {
        std::vector<Triplet> full;
        full.reserve(2 * upper_.size());
        for (const Triplet& t : upper_) {
            full.push_back(t);
            if (t.row != t.col) full.push_back({t.col, t.row, t.value});
        }
        std::sort(full.begin(), full.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        row_ptr_.assign(dim_ + 1, 0);
        col_.resize(full.size());
        val_.resize(full.size());
        for (std::size_t k = 0; k < full.size(); ++k) {
            ++row_ptr_[full[k].row + 1];
            col_[k] = full[k].col;
            val_[k] = full[k].value;
        }
        for (std::size_t r = 0; r < dim_; ++r) row_ptr_[r + 1] += row_ptr_[r];
    }

    std::size_t dim_ = 0;
    std::vector<Triplet> upper_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_;
    std::vector<double> val_;
};

namespace detail {

/// Iterates the product space with one qubit's site fixed out: calls
/// f(base) for every global index with qubit q's digit equal to zero;
/// the caller adds s * stride(q) on top.
template <typename F>
void for_each_rest1(std::size_t dim, std::size_t radix, std::size_t stride_q, F&& f) {
    const std::size_t block = stride_q * radix;
    for (std::size_t high = 0; high < dim / block; ++high)
        for (std::size_t low = 0; low < stride_q; ++low) f(high * block + low);
}

/// Same with two qubits' digits fixed out (strides must differ).
template <typename F>
void for_each_rest2(std::size_t dim, std::size_t radix, std::size_t stride_a,
                    std::size_t stride_b, F&& f) {
    std::size_t s1 = std::min(stride_a, stride_b);
    std::size_t s2 = std::max(stride_a, stride_b);
    const std::size_t b1 = s1 * radix;
    const std::size_t b2 = s2 * radix;
    for (std::size_t high = 0; high < dim / b2; ++high)
        for (std::size_t mid = 0; mid < s2 / b1; ++mid)
            for (std::size_t low = 0; low < s1; ++low)
                f(high * b2 + mid * b1 + low);
}

inline std::size_t qubit_stride(int qubit, std::size_t radix) {
    std::size_t p = 1;
    for (int a = 0; a < qubit; ++a) p *= radix;
    return p;
}

struct AssemblyContext {
    std::size_t dim;
    std::size_t radix;
    int num_qubits;
    int num_stages;
    double epsilon;
    std::vector<Triplet>* out;

    void emit(std::size_t i, std::size_t j, double v) const {
        if (i <= j)
            out->push_back({i, j, v});
        else
            out->push_back({j, i, v});
    }
};

/// eps [ n_q(j-1) + n_q(j) - (C+_j U C_{j-1} + h.c.) ] on qubit q.
inline void emit_single_gate_block(const AssemblyContext& ctx, int qubit, int stage,
                                   const Mat2& u) {
    const std::size_t stride = qubit_stride(qubit, ctx.radix);
    const double eps = ctx.epsilon;
    for_each_rest1(ctx.dim, ctx.radix, stride, [&](std::size_t base) {
        for (int row : {stage - 1, stage})
            for (int bit = 0; bit < 2; ++bit) {
                const std::size_t g = base + static_cast<std::size_t>(2 * row + bit) * stride;
                ctx.emit(g, g, eps);
            }
        for (int b = 0; b < 2; ++b)
            for (int bp = 0; bp < 2; ++bp) {
                if (u(b, bp) == 0.0) continue;
                const std::size_t gto =
                    base + static_cast<std::size_t>(2 * stage + b) * stride;
                const std::size_t gfrom =
                    base + static_cast<std::size_t>(2 * (stage - 1) + bp) * stride;
                ctx.emit(gfrom, gto, -eps * u(b, bp));
            }
    });
}

/// The four controlled-gate terms for control A, target B at stage j.
inline void emit_controlled_gate_block(const AssemblyContext& ctx, const ControlledGate& gate,
                                       int stage) {
    const std::size_t stride_a = qubit_stride(gate.control, ctx.radix);
    const std::size_t stride_b = qubit_stride(gate.target, ctx.radix);
    const double eps = ctx.epsilon;
    const Mat2 u0 = gate.u_on_0.matrix();
    const Mat2 u1 = gate.u_on_1.matrix();
    const int jm1 = stage - 1;

    for_each_rest2(ctx.dim, ctx.radix, stride_a, stride_b, [&](std::size_t base) {
        auto at = [&](int sa, int sb) {
            return base + static_cast<std::size_t>(sa) * stride_a +
                   static_cast<std::size_t>(sb) * stride_b;
        };
        // (i) eps * n_A(j-1) n_B(j): control waiting while target already through
        for (int ba = 0; ba < 2; ++ba)
            for (int bb = 0; bb < 2; ++bb) {
                const std::size_t g = at(2 * jm1 + ba, 2 * stage + bb);
                ctx.emit(g, g, eps);
            }
        // (ii) h_A(I) gated on target at row j-1
        for (int bb = 0; bb < 2; ++bb) {
            const int sb = 2 * jm1 + bb;
            for (int row : {jm1, stage})
                for (int ba = 0; ba < 2; ++ba) {
                    const std::size_t g = at(2 * row + ba, sb);
                    ctx.emit(g, g, eps);
                }
            for (int ba = 0; ba < 2; ++ba)
                ctx.emit(at(2 * jm1 + ba, sb), at(2 * stage + ba, sb), -eps);
        }
        // (iii)/(iv) h_B(u_on_b) gated on control arrived at row j with bit b
        for (int ba = 0; ba < 2; ++ba) {
            const Mat2& u = ba == 0 ? u0 : u1;
            const int sa = 2 * stage + ba;
            for (int row : {jm1, stage})
                for (int bb = 0; bb < 2; ++bb) {
                    const std::size_t g = at(sa, 2 * row + bb);
                    ctx.emit(g, g, eps);
                }
            for (int b = 0; b < 2; ++b)
                for (int bp = 0; bp < 2; ++bp) {
                    if (u(b, bp) == 0.0) continue;
                    ctx.emit(at(sa, 2 * jm1 + bp), at(sa, 2 * stage + b), -eps * u(b, bp));
                }
        }
    });
}

inline void emit_bias(const AssemblyContext& ctx, const BiasSpec& bias) {
    if (static_cast<int>(bias.input_bits.size()) != ctx.num_qubits)
        throw std::invalid_argument("bias: input_bits length must equal num_qubits");
    if (!(bias.delta > 0.0)) throw std::invalid_argument("bias: delta must be positive");
    for (int a = 0; a < ctx.num_qubits; ++a) {
        const int wrong_bit = 1 - bias.input_bits[static_cast<std::size_t>(a)];
        const std::size_t stride = qubit_stride(a, ctx.radix);
        for_each_rest1(ctx.dim, ctx.radix, stride, [&](std::size_t base) {
            const std::size_t g = base + static_cast<std::size_t>(wrong_bit) * stride;
            ctx.emit(g, g, bias.delta);
        });
    }
}

} // namespace detail

/// Drop threshold for merged assembly entries.
inline double assembly_drop_tol(double epsilon) { return 1e-15 * epsilon; }

/// The single-gate stage block as a standalone operator on the full space
/// (identity on the other qubits). stage must be >= 1.
inline SparseSymMatrix single_gate_block(int num_qubits, int num_stages, double epsilon,
                                         int qubit, int stage, const SingleGate& gate) {
    if (stage < 1 || stage > num_stages)
        throw std::invalid_argument("single_gate_block: no block enters row 0 (need 1 <= stage <= N)");
    std::vector<Triplet> triplets;
    const std::size_t d = space_dim(num_qubits, num_stages);
    detail::AssemblyContext ctx{d, sites_per_qubit(num_stages), num_qubits,
                                num_stages, epsilon, &triplets};
    detail::emit_single_gate_block(ctx, qubit, stage, gate.matrix());
    return SparseSymMatrix::from_triplets(d, std::move(triplets), assembly_drop_tol(epsilon));
}

/// The controlled-gate stage block as a standalone operator on the full space.
inline SparseSymMatrix controlled_gate_block(int num_qubits, int num_stages, double epsilon,
                                             const ControlledGate& gate, int stage) {
    if (stage < 1 || stage > num_stages)
        throw std::invalid_argument("controlled_gate_block: need 1 <= stage <= N");
    if (gate.control == gate.target)
        throw std::invalid_argument("controlled_gate_block: control equals target");
    std::vector<Triplet> triplets;
    const std::size_t d = space_dim(num_qubits, num_stages);
    detail::AssemblyContext ctx{d, sites_per_qubit(num_stages), num_qubits,
                                num_stages, epsilon, &triplets};
    detail::emit_controlled_gate_block(ctx, gate, stage);
    return SparseSymMatrix::from_triplets(d, std::move(triplets), assembly_drop_tol(epsilon));
}

/// Full Hamiltonian: stage blocks ascending (singles by qubit, then
/// controlled by control index), plus the optional input bias.
inline SparseSymMatrix assemble(const Circuit& circuit,
                                const std::optional<BiasSpec>& bias = std::nullopt) {
    const int m = circuit.num_qubits;
    const int n = circuit.num_stages();
    const std::size_t d = space_dim(m, n);
    std::vector<Triplet> triplets;
    detail::AssemblyContext ctx{d, sites_per_qubit(n), m, n, circuit.epsilon, &triplets};

    for (int j = 1; j <= n; ++j) {
        const Stage& stage = circuit.stages[static_cast<std::size_t>(j - 1)];
        std::vector<const SingleAssignment*> singles;
        std::vector<const ControlledGate*> controlled;
        for (const Assignment& a : stage.assignments) {
            if (const auto* s = std::get_if<SingleAssignment>(&a))
                singles.push_back(s);
            else
                controlled.push_back(&std::get<ControlledGate>(a));
        }
        std::sort(singles.begin(), singles.end(),
                  [](auto* a, auto* b) { return a->qubit < b->qubit; });
        std::sort(controlled.begin(), controlled.end(),
                  [](auto* a, auto* b) { return a->control < b->control; });
        for (const auto* s : singles)
            detail::emit_single_gate_block(ctx, s->qubit, j, s->gate.matrix());
        for (const auto* g : controlled) detail::emit_controlled_gate_block(ctx, *g, j);
    }
    if (bias) detail::emit_bias(ctx, *bias);
    return SparseSymMatrix::from_triplets(d, std::move(triplets),
                                          assembly_drop_tol(circuit.epsilon));
}

} // namespace gsqc
