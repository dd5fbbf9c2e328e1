#pragma once

// Circuit intermediate representation for a quantum-dot ground state
// computer: stages of real orthogonal single-qubit gates and controlled
// gates, plus the line-oriented text format and the built-in two-qubit
// Grover search program.

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gsqc {

inline constexpr double kOrthogonalityTol = 1e-12;

/// Real 2x2 matrix, entries indexed (row, col) = (new bit, old bit).
struct Mat2 {
    double v[2][2];

    constexpr double operator()(int r, int c) const { return v[r][c]; }

    static constexpr Mat2 identity() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }
    static constexpr Mat2 not_gate() { return {{{0.0, 1.0}, {1.0, 0.0}}}; }
    static Mat2 rotation(double theta) {
        const double c = std::cos(theta), s = std::sin(theta);
        return {{{c, s}, {-s, c}}};
    }

    /// Largest entrywise deviation of U^T U from the identity.
    double orthogonality_defect() const {
        double worst = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double g = v[0][i] * v[0][j] + v[1][i] * v[1][j];
                worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
            }
        return worst;
    }

    double det() const { return v[0][0] * v[1][1] - v[0][1] * v[1][0]; }
};

enum class GateKind { Identity, Not, Rotation, Orthogonal };

struct SingleGate {
    GateKind kind = GateKind::Identity;
    double theta = 0.0;              // Rotation only
    Mat2 entries = Mat2::identity(); // Orthogonal only

    static SingleGate identity() { return {}; }
    static SingleGate not_gate() { return {GateKind::Not}; }
    static SingleGate rotation(double theta) { return {GateKind::Rotation, theta}; }
    static SingleGate orthogonal(double m00, double m01, double m10, double m11) {
        SingleGate g;
        g.kind = GateKind::Orthogonal;
        g.entries = Mat2{{{m00, m01}, {m10, m11}}};
        return g;
    }

    Mat2 matrix() const {
        switch (kind) {
        case GateKind::Identity: return Mat2::identity();
        case GateKind::Not: return Mat2::not_gate();
        case GateKind::Rotation: return Mat2::rotation(theta);
        case GateKind::Orthogonal: return entries;
        }
        return Mat2::identity();
    }
};

struct SingleAssignment {
    int qubit = 0;
    SingleGate gate;
};

/// Two-qubit conditional gate: the target suffers u_on_0 or u_on_1
/// depending on the control qubit's bit value. The usual CNOT is
/// (u_on_0, u_on_1) = (I, N); the zero-controlled variant is (N, I).
struct ControlledGate {
    int control = 0;
    int target = 1;
    SingleGate u_on_0;
    SingleGate u_on_1;
};

using Assignment = std::variant<SingleAssignment, ControlledGate>;

struct Stage {
    std::vector<Assignment> assignments;
};

struct Circuit {
    int num_qubits = 1;
    std::vector<Stage> stages;
    double epsilon = 1.0;

    int num_stages() const { return static_cast<int>(stages.size()); }
    int rows() const { return num_stages() + 1; }
};

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
    std::string joined() const {
        std::string all;
        for (const auto& e : errors) {
            if (!all.empty()) all += "; ";
            all += e;
        }
        return all;
    }
};

namespace detail {
inline void check_gate_matrix(const SingleGate& g, const std::string& where,
                              std::vector<std::string>& errors) {
    const double defect = g.matrix().orthogonality_defect();
    if (!(defect <= kOrthogonalityTol) || !std::isfinite(defect))
        errors.push_back(where + ": gate matrix not orthogonal (defect " +
                         std::to_string(defect) + ")");
}
} // namespace detail

inline ValidationReport validate(const Circuit& c) {
    ValidationReport report;
    auto& errors = report.errors;
    if (c.num_qubits < 1) errors.push_back("circuit: num_qubits must be >= 1");
    if (!(c.epsilon > 0.0) || !std::isfinite(c.epsilon))
        errors.push_back("circuit: epsilon must be positive and finite");

    for (int j = 0; j < c.num_stages(); ++j) {
        const Stage& stage = c.stages[static_cast<std::size_t>(j)];
        const std::string at = "stage " + std::to_string(j);
        std::vector<int> coverage(static_cast<std::size_t>(std::max(c.num_qubits, 1)), 0);
        auto cover = [&](int q) {
            if (q < 0 || q >= c.num_qubits)
                errors.push_back(at + ": qubit index " + std::to_string(q) + " out of range");
            else
                ++coverage[static_cast<std::size_t>(q)];
        };
        for (const Assignment& a : stage.assignments) {
            if (const auto* s = std::get_if<SingleAssignment>(&a)) {
                cover(s->qubit);
                detail::check_gate_matrix(s->gate, at + ", qubit " + std::to_string(s->qubit),
                                          errors);
            } else {
                const auto& g = std::get<ControlledGate>(a);
                if (g.control == g.target)
                    errors.push_back(at + ": control equals target (" +
                                     std::to_string(g.control) + ")");
                cover(g.control);
                if (g.target != g.control) cover(g.target);
                detail::check_gate_matrix(g.u_on_0, at + ", controlled u0", errors);
                detail::check_gate_matrix(g.u_on_1, at + ", controlled u1", errors);
            }
        }
        for (int q = 0; q < c.num_qubits; ++q) {
            const int n = coverage[static_cast<std::size_t>(q)];
            if (n == 0)
                errors.push_back(at + ": qubit " + std::to_string(q) + " unassigned");
            else if (n > 1)
                errors.push_back(at + ": qubit " + std::to_string(q) + " assigned " +
                                 std::to_string(n) + " times");
        }
    }
    return report;
}

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const ValidationReport& report)
        : std::runtime_error("invalid circuit: " + report.joined()) {}
};

// ---------------------------------------------------------------------------
// Text format
//
//   qubits <M>
//   epsilon <float>                # optional, default 1.0
//   stage <assignment> [; <assignment>]...
//
// Assignments: I <q> | N <q> | R <q> <theta> | O <q> <m00> <m01> <m10> <m11>
//   | CNOT control=<q> target=<q> on=<0|1>
//   | CU control=<q> target=<q> u0=<gatespec> u1=<gatespec>
//   | I *            (identity on every qubit not otherwise assigned)
// gatespec: I | N | R:<theta> | O:<m00>,<m01>,<m10>,<m11>

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

inline double parse_double(const std::string& tok, int line, const char* what) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError(line, std::string("malformed number for ") + what + ": '" + tok + "'");
    return x;
}

inline int parse_int(const std::string& tok, int line, const char* what) {
    char* end = nullptr;
    const long x = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
        throw ParseError(line, std::string("malformed integer for ") + what + ": '" + tok + "'");
    return static_cast<int>(x);
}

/// Value of "key=..." token, or error.
inline std::string kv_value(const std::string& tok, const char* key, int line) {
    const std::string prefix = std::string(key) + "=";
    if (tok.rfind(prefix, 0) != 0)
        throw ParseError(line, "expected '" + prefix + "...', got '" + tok + "'");
    return tok.substr(prefix.size());
}

inline SingleGate parse_gatespec(const std::string& spec, int line) {
    if (spec == "I") return SingleGate::identity();
    if (spec == "N") return SingleGate::not_gate();
    if (spec.rfind("R:", 0) == 0)
        return SingleGate::rotation(parse_double(spec.substr(2), line, "gatespec theta"));
    if (spec.rfind("O:", 0) == 0) {
        std::vector<std::string> parts;
        std::string rest = spec.substr(2);
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = rest.find(',', pos);
            parts.push_back(rest.substr(pos, comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (parts.size() != 4)
            throw ParseError(line, "gatespec 'O:' needs 4 comma-separated entries");
        return SingleGate::orthogonal(parse_double(parts[0], line, "gatespec m00"),
                                      parse_double(parts[1], line, "gatespec m01"),
                                      parse_double(parts[2], line, "gatespec m10"),
                                      parse_double(parts[3], line, "gatespec m11"));
    }
    throw ParseError(line, "unknown gatespec '" + spec + "'");
}

inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string gatespec_string(const SingleGate& g) {
    switch (g.kind) {
    case GateKind::Identity: return "I";
    case GateKind::Not: return "N";
    case GateKind::Rotation: return "R:" + format_double(g.theta);
    case GateKind::Orthogonal: {
        const Mat2& m = g.entries;
        return "O:" + format_double(m(0, 0)) + "," + format_double(m(0, 1)) + "," +
               format_double(m(1, 0)) + "," + format_double(m(1, 1));
    }
    }
    return "I";
}

} // namespace detail

inline Circuit parse_circuit(std::istream& in) {
    Circuit circuit;
    bool saw_qubits = false;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const auto toks = detail::split_ws(raw);
        if (toks.empty()) continue;

        if (toks[0] == "qubits") {
            if (saw_qubits) throw ParseError(line_no, "duplicate 'qubits' line");
            if (toks.size() != 2) throw ParseError(line_no, "'qubits' takes one argument");
            circuit.num_qubits = detail::parse_int(toks[1], line_no, "qubits");
            saw_qubits = true;
            continue;
        }
        if (toks[0] == "epsilon") {
            if (toks.size() != 2) throw ParseError(line_no, "'epsilon' takes one argument");
            circuit.epsilon = detail::parse_double(toks[1], line_no, "epsilon");
            continue;
        }
        if (toks[0] != "stage")
            throw ParseError(line_no, "unknown directive '" + toks[0] + "'");
        if (!saw_qubits) throw ParseError(line_no, "'stage' before 'qubits'");

        // Split the remaining tokens on ';' separators.
        Stage stage;
        std::vector<std::vector<std::string>> groups(1);
        for (std::size_t t = 1; t < toks.size(); ++t) {
            std::string tok = toks[t];
            while (true) {
                const std::size_t semi = tok.find(';');
                if (semi == std::string::npos) break;
                if (semi > 0) groups.back().push_back(tok.substr(0, semi));
                groups.emplace_back();
                tok = tok.substr(semi + 1);
            }
            if (!tok.empty()) groups.back().push_back(tok);
        }

        bool fill_identity = false;
        std::vector<bool> assigned(static_cast<std::size_t>(circuit.num_qubits), false);
        auto mark = [&](int q) {
            if (q >= 0 && q < circuit.num_qubits) assigned[static_cast<std::size_t>(q)] = true;
        };
        for (const auto& g : groups) {
            if (g.empty()) throw ParseError(line_no, "empty assignment in stage");
            const std::string& op = g[0];
            auto need = [&](std::size_t n) {
                if (g.size() != n)
                    throw ParseError(line_no, "assignment '" + op + "' takes " +
                                                  std::to_string(n - 1) + " argument(s), got " +
                                                  std::to_string(g.size() - 1));
            };
            if (op == "I" && g.size() == 2 && g[1] == "*") {
                fill_identity = true;
            } else if (op == "I" || op == "N") {
                need(2);
                const int q = detail::parse_int(g[1], line_no, "qubit");
                stage.assignments.push_back(SingleAssignment{
                    q, op == "I" ? SingleGate::identity() : SingleGate::not_gate()});
                mark(q);
            } else if (op == "R") {
                need(3);
                const int q = detail::parse_int(g[1], line_no, "qubit");
                stage.assignments.push_back(
                    SingleAssignment{q, SingleGate::rotation(
                                            detail::parse_double(g[2], line_no, "theta"))});
                mark(q);
            } else if (op == "O") {
                need(6);
                const int q = detail::parse_int(g[1], line_no, "qubit");
                stage.assignments.push_back(SingleAssignment{
                    q, SingleGate::orthogonal(detail::parse_double(g[2], line_no, "m00"),
                                              detail::parse_double(g[3], line_no, "m01"),
                                              detail::parse_double(g[4], line_no, "m10"),
                                              detail::parse_double(g[5], line_no, "m11"))});
                mark(q);
            } else if (op == "CNOT") {
                need(4);
                ControlledGate cg;
                cg.control = detail::parse_int(detail::kv_value(g[1], "control", line_no),
                                               line_no, "control");
                cg.target =
                    detail::parse_int(detail::kv_value(g[2], "target", line_no), line_no,
                                      "target");
                const int on = detail::parse_int(detail::kv_value(g[3], "on", line_no), line_no,
                                                 "on");
                if (on != 0 && on != 1) throw ParseError(line_no, "CNOT 'on' must be 0 or 1");
                cg.u_on_0 = on == 1 ? SingleGate::identity() : SingleGate::not_gate();
                cg.u_on_1 = on == 1 ? SingleGate::not_gate() : SingleGate::identity();
                stage.assignments.push_back(cg);
                mark(cg.control);
                mark(cg.target);
            } else if (op == "CU") {
                need(5);
                ControlledGate cg;
                cg.control = detail::parse_int(detail::kv_value(g[1], "control", line_no),
                                               line_no, "control");
                cg.target =
                    detail::parse_int(detail::kv_value(g[2], "target", line_no), line_no,
                                      "target");
                cg.u_on_0 = detail::parse_gatespec(detail::kv_value(g[3], "u0", line_no), line_no);
                cg.u_on_1 = detail::parse_gatespec(detail::kv_value(g[4], "u1", line_no), line_no);
                stage.assignments.push_back(cg);
                mark(cg.control);
                mark(cg.target);
            } else {
                throw ParseError(line_no, "unknown gate mnemonic '" + op + "'");
            }
        }
        if (fill_identity)
            for (int q = 0; q < circuit.num_qubits; ++q)
                if (!assigned[static_cast<std::size_t>(q)])
                    stage.assignments.push_back(SingleAssignment{q, SingleGate::identity()});
        circuit.stages.push_back(std::move(stage));
    }
    if (!saw_qubits) throw ParseError(line_no == 0 ? 1 : line_no, "missing 'qubits' line");
    return circuit;
}

inline Circuit parse_circuit(const std::string& text) {
    std::istringstream in(text);
    return parse_circuit(in);
}

inline std::string serialize_circuit(const Circuit& c) {
    std::string out = "qubits " + std::to_string(c.num_qubits) + "\n";
    out += "epsilon " + detail::format_double(c.epsilon) + "\n";
    for (const Stage& stage : c.stages) {
        out += "stage";
        bool first = true;
        for (const Assignment& a : stage.assignments) {
            out += first ? " " : " ; ";
            first = false;
            if (const auto* s = std::get_if<SingleAssignment>(&a)) {
                const std::string q = std::to_string(s->qubit);
                switch (s->gate.kind) {
                case GateKind::Identity: out += "I " + q; break;
                case GateKind::Not: out += "N " + q; break;
                case GateKind::Rotation:
                    out += "R " + q + " " + detail::format_double(s->gate.theta);
                    break;
                case GateKind::Orthogonal: {
                    const Mat2& m = s->gate.entries;
                    out += "O " + q + " " + detail::format_double(m(0, 0)) + " " +
                           detail::format_double(m(0, 1)) + " " + detail::format_double(m(1, 0)) +
                           " " + detail::format_double(m(1, 1));
                    break;
                }
                }
            } else {
                const auto& g = std::get<ControlledGate>(a);
                const std::string ct = "control=" + std::to_string(g.control) +
                                       " target=" + std::to_string(g.target);
                if (g.u_on_0.kind == GateKind::Identity && g.u_on_1.kind == GateKind::Not)
                    out += "CNOT " + ct + " on=1";
                else if (g.u_on_0.kind == GateKind::Not && g.u_on_1.kind == GateKind::Identity)
                    out += "CNOT " + ct + " on=0";
                else
                    out += "CU " + ct + " u0=" + detail::gatespec_string(g.u_on_0) +
                           " u1=" + detail::gatespec_string(g.u_on_1);
            }
        }
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Built-in program: two-qubit Grover search, W C W P W, 12 stages.
//
// W: R(pi/4) on both qubits, then NOT on both qubits.
// C: R(pi/4) on qubit 1, CNOT(control=0, target=1, on=1), R(-pi/4) on qubit 1.
// P: R(-pi/4) on qubit 1, CNOT(control=0, target=1, on=0), R(pi/4) on qubit 1.
// Qubit 0 idles (explicit identity) during the C/P rotation stages.

inline Circuit grover_circuit() {
    constexpr double quarter = M_PI / 4.0;
    Circuit c;
    c.num_qubits = 2;

    auto single_pair = [](SingleGate g0, SingleGate g1) {
        Stage s;
        s.assignments.push_back(SingleAssignment{0, g0});
        s.assignments.push_back(SingleAssignment{1, g1});
        return s;
    };
    auto cnot_stage = [](int on) {
        Stage s;
        ControlledGate g;
        g.control = 0;
        g.target = 1;
        g.u_on_0 = on == 1 ? SingleGate::identity() : SingleGate::not_gate();
        g.u_on_1 = on == 1 ? SingleGate::not_gate() : SingleGate::identity();
        s.assignments.push_back(g);
        return s;
    };
    auto append_w = [&]() {
        c.stages.push_back(single_pair(SingleGate::rotation(quarter), SingleGate::rotation(quarter)));
        c.stages.push_back(single_pair(SingleGate::not_gate(), SingleGate::not_gate()));
    };

    append_w();
    c.stages.push_back(single_pair(SingleGate::identity(), SingleGate::rotation(quarter)));
    c.stages.push_back(cnot_stage(1));
    c.stages.push_back(single_pair(SingleGate::identity(), SingleGate::rotation(-quarter)));
    append_w();
    c.stages.push_back(single_pair(SingleGate::identity(), SingleGate::rotation(-quarter)));
    c.stages.push_back(cnot_stage(0));
    c.stages.push_back(single_pair(SingleGate::identity(), SingleGate::rotation(quarter)));
    append_w();
    return c;
}

} // namespace gsqc
