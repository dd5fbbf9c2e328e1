#pragma once

// Two independent reference constructions. The gate oracle is a plain
// state-vector simulator on the 2^M register. The recursion builds the
// designed zero-energy state in the full product basis, stage by stage:
// single gates apply (1 + shift from row j-1 to row j through U); a
// controlled gate applies 1 + sum_b [control shift in bit b] (1 + target
// shift through u_on_b). Normalization happens once at the end.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "gsqc/circuit.hpp"
#include "gsqc/hilbert.hpp"

namespace gsqc {

/// Amplitudes over 2^M bit configurations (qubit 0 least significant).
struct RegisterState {
    int num_qubits = 1;
    std::vector<double> amplitudes;

    static RegisterState basis(int num_qubits, unsigned configuration) {
        RegisterState r;
        r.num_qubits = num_qubits;
        r.amplitudes.assign(std::size_t{1} << num_qubits, 0.0);
        r.amplitudes.at(configuration) = 1.0;
        return r;
    }

    double norm() const {
        double n2 = 0.0;
        for (double a : amplitudes) n2 += a * a;
        return std::sqrt(n2);
    }
};

namespace detail {

inline void apply_single_to_register(std::vector<double>& amp, int qubit, const Mat2& u) {
    const std::size_t mask = std::size_t{1} << qubit;
    for (std::size_t i = 0; i < amp.size(); ++i) {
        if (i & mask) continue;
        const std::size_t j = i | mask;
        const double a0 = amp[i], a1 = amp[j];
        amp[i] = u(0, 0) * a0 + u(0, 1) * a1;
        amp[j] = u(1, 0) * a0 + u(1, 1) * a1;
    }
}

inline void apply_controlled_to_register(std::vector<double>& amp, const ControlledGate& gate) {
    const std::size_t cmask = std::size_t{1} << gate.control;
    const std::size_t tmask = std::size_t{1} << gate.target;
    const Mat2 u0 = gate.u_on_0.matrix();
    const Mat2 u1 = gate.u_on_1.matrix();
    for (std::size_t i = 0; i < amp.size(); ++i) {
        if (i & tmask) continue;
        const std::size_t j = i | tmask;
        const Mat2& u = (i & cmask) ? u1 : u0;
        const double a0 = amp[i], a1 = amp[j];
        amp[i] = u(0, 0) * a0 + u(0, 1) * a1;
        amp[j] = u(1, 0) * a0 + u(1, 1) * a1;
    }
}

} // namespace detail

/// Applies stages 1..upto_stage of the circuit to basis input n.
inline RegisterState gate_oracle_run(const Circuit& circuit, unsigned input, int upto_stage) {
    if (upto_stage < 0 || upto_stage > circuit.num_stages())
        throw std::out_of_range("gate_oracle_run: stage out of range");
    if (input >= (std::size_t{1} << circuit.num_qubits))
        throw std::out_of_range("gate_oracle_run: input out of range");
    RegisterState reg = RegisterState::basis(circuit.num_qubits, input);
    for (int j = 0; j < upto_stage; ++j)
        for (const Assignment& a : circuit.stages[static_cast<std::size_t>(j)].assignments) {
            if (const auto* s = std::get_if<SingleAssignment>(&a))
                detail::apply_single_to_register(reg.amplitudes, s->qubit, s->gate.matrix());
            else
                detail::apply_controlled_to_register(reg.amplitudes, std::get<ControlledGate>(a));
        }
    return reg;
}

inline RegisterState gate_oracle_run(const Circuit& circuit, unsigned input) {
    return gate_oracle_run(circuit, input, circuit.num_stages());
}

namespace detail {

struct RecursionSpace {
    std::size_t radix;
    std::vector<std::size_t> stride;

    explicit RecursionSpace(const Circuit& c) : radix(sites_per_qubit(c.num_stages())) {
        stride.resize(static_cast<std::size_t>(c.num_qubits));
        std::size_t p = 1;
        for (int a = 0; a < c.num_qubits; ++a) {
            stride[static_cast<std::size_t>(a)] = p;
            p *= radix;
        }
    }

    int site_of(std::size_t g, int qubit) const {
        return static_cast<int>((g / stride[static_cast<std::size_t>(qubit)]) % radix);
    }
    std::size_t with_site(std::size_t g, int qubit, int from_site, int to_site) const {
        return g + (static_cast<std::size_t>(to_site) - static_cast<std::size_t>(from_site)) *
                       stride[static_cast<std::size_t>(qubit)];
    }
};

/// v <- (1 + C+_j U C_{j-1}) v on one qubit.
inline void apply_recursion_single(std::vector<double>& amp, const RecursionSpace& space,
                                   int qubit, int stage, const Mat2& u) {
    const std::vector<double> snapshot = amp;
    for (std::size_t g = 0; g < snapshot.size(); ++g) {
        const double a = snapshot[g];
        if (a == 0.0) continue;
        const int s = space.site_of(g, qubit);
        const int row = s / 2, bit = s % 2;
        if (row != stage - 1) continue;
        for (int b = 0; b < 2; ++b) {
            const double w = u(b, bit);
            if (w == 0.0) continue;
            amp[space.with_site(g, qubit, s, 2 * stage + b)] += w * a;
        }
    }
}

/// v <- (1 + sum_b shiftA_b (1 + shiftB(u_on_b))) v.
inline void apply_recursion_controlled(std::vector<double>& amp, const RecursionSpace& space,
                                       const ControlledGate& gate, int stage) {
    const Mat2 u0 = gate.u_on_0.matrix();
    const Mat2 u1 = gate.u_on_1.matrix();
    const std::vector<double> snapshot = amp;
    for (std::size_t g = 0; g < snapshot.size(); ++g) {
        const double a = snapshot[g];
        if (a == 0.0) continue;
        const int sa = space.site_of(g, gate.control);
        if (sa / 2 != stage - 1) continue;
        const int bit_a = sa % 2;
        const std::size_t g_moved = space.with_site(g, gate.control, sa, 2 * stage + bit_a);
        amp[g_moved] += a; // control through, target not yet
        const int sb = space.site_of(g, gate.target);
        if (sb / 2 != stage - 1) continue;
        const Mat2& u = bit_a == 0 ? u0 : u1;
        for (int b = 0; b < 2; ++b) {
            const double w = u(b, sb % 2);
            if (w == 0.0) continue;
            amp[space.with_site(g_moved, gate.target, sb, 2 * stage + b)] += w * a;
        }
    }
}

} // namespace detail

/// Builds the designed ground state from arbitrary row-0 register data
/// (the recursion is linear in the initial amplitudes). Normalized.
inline StateVector recursion_state(const Circuit& circuit,
                                   std::span<const double> row0_register) {
    const int m = circuit.num_qubits;
    if (row0_register.size() != (std::size_t{1} << m))
        throw std::invalid_argument("recursion_state: register size must be 2^M");
    StateVector state = StateVector::zero(m, circuit.num_stages());
    const detail::RecursionSpace space(circuit);
    for (std::size_t cfg = 0; cfg < row0_register.size(); ++cfg) {
        if (row0_register[cfg] == 0.0) continue;
        std::size_t g = 0;
        for (int a = 0; a < m; ++a)
            g += static_cast<std::size_t>((cfg >> a) & 1u) * space.stride[static_cast<std::size_t>(a)];
        state.amplitudes[g] = row0_register[cfg];
    }

    for (int j = 1; j <= circuit.num_stages(); ++j) {
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
        // factors on distinct qubits commute; non-participating qubits first
        for (const auto* s : singles)
            detail::apply_recursion_single(state.amplitudes, space, s->qubit, j,
                                           s->gate.matrix());
        for (const auto* g : controlled)
            detail::apply_recursion_controlled(state.amplitudes, space, *g, j);
    }
    state.normalize();
    return state;
}

/// Designed ground state for basis input n.
inline StateVector recursion_state(const Circuit& circuit, unsigned input) {
    std::vector<double> reg(std::size_t{1} << circuit.num_qubits, 0.0);
    reg.at(input) = 1.0;
    return recursion_state(circuit, reg);
}

/// Checks |Psi_n^N> against U_N ... U_1 applied to the input: fidelity
/// (squared overlap, global sign modded out) between the normalized row-N
/// projection of the recursion state and the gate oracle's final register.
struct IdentityCheckReport {
    double fidelity = 0.0;
    std::vector<double> projected; // normalized row-N projection
    std::vector<double> oracle;    // gate-oracle final register
};

inline IdentityCheckReport final_state_identity_check(const Circuit& circuit, unsigned input) {
    IdentityCheckReport report;
    const StateVector psi = recursion_state(circuit, input);
    report.projected = project_row(psi, circuit.num_stages());
    const double pnorm = detail::norm(report.projected);
    if (pnorm > 0.0)
        for (double& a : report.projected) a /= pnorm;
    report.oracle = gate_oracle_run(circuit, input).amplitudes;
    const double overlap = detail::dot(report.projected, report.oracle);
    report.fidelity = overlap * overlap;
    return report;
}

} // namespace gsqc
