#pragma once

// Almost-complex structures on the bidisk, given as polynomial perturbations of
// the standard structure, and their reduction to scalar Beltrami coefficients.
//
// A structure is a pair of 2x2 real matrix fields A(p), B(p) over p in C^2
// (coordinates (x1, y1, x2, y2)), each of the form J_st + polynomial terms,
// with A governing the first complex coordinate and B the second.  Evaluation
// applies a pointwise retraction back onto the variety {M^2 = -I}: polynomial
// perturbations have no reason to square to -I away from the origin, and the
// retraction M (-M^2)^{-1/2} restores that identity without moving structures
// that already satisfy it.
//
// The scalar reduction sends a matrix M with M^2 = -I near J_st to
//   q = -[I - M J_st]^{-1} [I + M J_st],
// which acts on C as w -> mu1 w + mu2 conj(w) after splitting q into its
// J_st-commuting and anticommuting parts.  The disk equation solved downstream
// is dbar(u) = mu1 du + mu2 conj(du) with (mu1, mu2) evaluated at the image
// point, so sup(|mu1| + |mu2|) < 1 (in practice <= 0.1 for the shipped
// structures) is the smallness that makes the iteration contract.

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jholo/core.hpp"

namespace jholo {

// ---------------------------------------------------------------------------
// polynomial matrix fields
// ---------------------------------------------------------------------------

/// One monomial term coeff * x1^p0 y1^p1 x2^p2 y2^p3 placed in a matrix entry.
struct PolyTerm {
    int row = 0, col = 0;
    std::array<int, 4> powers{0, 0, 0, 0};
    double coeff = 0.0;
};

/// J_st plus a list of monomial terms; evaluated pointwise over C^2.
struct MatrixPoly {
    std::vector<PolyTerm> terms;

    Mat2 eval(const C2& p) const {
        Mat2 m = Mat2::j_std();
        const double x1 = p.z1.real(), y1 = p.z1.imag();
        const double x2 = p.z2.real(), y2 = p.z2.imag();
        for (const PolyTerm& t : terms) {
            double v = t.coeff;
            for (int n = 0; n < t.powers[0]; ++n) v *= x1;
            for (int n = 0; n < t.powers[1]; ++n) v *= y1;
            for (int n = 0; n < t.powers[2]; ++n) v *= x2;
            for (int n = 0; n < t.powers[3]; ++n) v *= y2;
            m.m[t.row][t.col] += v;
        }
        return m;
    }
};

// ---------------------------------------------------------------------------
// retraction onto M^2 = -I
// ---------------------------------------------------------------------------

/// How far a matrix is from defining a complex structure on the fiber.
inline double structure_deviation(const Mat2& m) { return max_abs(m * m + Mat2::identity()); }

/// Retract M to M (-M^2)^{-1/2}.  Accepts matrices already on the variety
/// (deviation <= 1e-10) unchanged; rejects deviations beyond 0.5, which are far
/// outside the perturbative regime every estimate here assumes.
inline Mat2 retract_structure(const Mat2& m) {
    const double dev = structure_deviation(m);
    if (dev <= 1e-10) return m;
    if (dev > 0.5) {
        std::ostringstream os;
        os << "matrix is too far from a complex structure (|M^2 + I| = " << dev << " > 0.5)";
        throw OutOfRegimeError(os.str());
    }
    const Mat2 s = -1.0 * (m * m);  // near identity
    const Mat2 r = m * inverse(sqrt_near_identity(s));
    return r;
}

// ---------------------------------------------------------------------------
// scalar Beltrami reduction
// ---------------------------------------------------------------------------

/// q = -[I - M J_st]^{-1} [I + M J_st]; zero iff M = J_st, singular at M = -J_st.
inline Mat2 q_of(const Mat2& m) {
    const Mat2 j = Mat2::j_std();
    const Mat2 lhs = Mat2::identity() - m * j;
    if (std::abs(det(lhs)) < 1e-12)
        throw NumericalError("structure is opposite to the standard orientation; q is singular");
    return -1.0 * (inverse(lhs) * (Mat2::identity() + m * j));
}

struct BeltramiPair {
    cplx mu1{0.0, 0.0};  // coefficient of du
    cplx mu2{0.0, 0.0};  // coefficient of conj(du)

    double bound() const { return std::abs(mu1) + std::abs(mu2); }
};

/// Split a real 2x2 matrix acting on C into its complex-linear part mu1 w and
/// antilinear part mu2 conj(w); exact as a matrix decomposition.
inline BeltramiPair split_linear_antilinear(const Mat2& q) {
    const Mat2 j = Mat2::j_std();
    const Mat2 commuting = 0.5 * (q - j * q * j);
    const Mat2 anti = 0.5 * (q + j * q * j);
    BeltramiPair out;
    out.mu1 = cplx{commuting.m[0][0], commuting.m[1][0]};
    out.mu2 = cplx{anti.m[0][0], anti.m[1][0]};
    return out;
}

inline BeltramiPair beltrami_of(const Mat2& structure_matrix) {
    return split_linear_antilinear(q_of(structure_matrix));
}

// ---------------------------------------------------------------------------
// structures
// ---------------------------------------------------------------------------

struct AlmostComplexStructure {
    std::string description;
    double epsilon = 1.0;  // dilation applied to the argument: fields are evaluated at epsilon * p
    MatrixPoly a;          // first-coordinate structure block
    MatrixPoly b;          // second-coordinate structure block

    Mat2 eval_a(const C2& p) const { return retract_structure(a.eval(epsilon * p)); }
    Mat2 eval_b(const C2& p) const { return retract_structure(b.eval(epsilon * p)); }

    /// Beltrami coefficients of the first-coordinate equation at image point p.
    BeltramiPair coefficients_a(const C2& p) const { return beltrami_of(eval_a(p)); }
    /// Beltrami coefficients of the second-coordinate equation at image point p.
    BeltramiPair coefficients_b(const C2& p) const { return beltrami_of(eval_b(p)); }

    AlmostComplexStructure with_epsilon(double eps) const {
        if (!(eps > 0.0) || !std::isfinite(eps)) throw SchemaError("epsilon must be positive and finite");
        AlmostComplexStructure s = *this;
        s.epsilon = eps;
        return s;
    }
};

/// Deterministic sup of |mu1| + |mu2| over a polar grid of the closed bidisk,
/// both coordinate blocks.  This is the contraction budget of the solver.
inline double coefficient_bound(const AlmostComplexStructure& s, int samples_per_axis = 6) {
    std::vector<cplx> pts;
    pts.push_back(cplx{0.0, 0.0});
    for (int r = 1; r <= samples_per_axis; ++r) {
        const double rho = static_cast<double>(r) / samples_per_axis;
        for (int a = 0; a < 8; ++a) {
            const double th = 2.0 * kPi * a / 8.0;
            pts.push_back(cplx{rho * std::cos(th), rho * std::sin(th)});
        }
    }
    double worst = 0.0;
    for (const cplx& u : pts) {
        for (const cplx& v : pts) {
            const C2 p{u, v};
            worst = std::max(worst, s.coefficients_a(p).bound());
            worst = std::max(worst, s.coefficients_b(p).bound());
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace detail {

inline MatrixPoly parse_matrix_poly(const nlohmann::json& j, const char* name) {
    if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array()) {
        std::ostringstream os;
        os << "block '" << name << "' must be an object with a 'terms' array";
        throw SchemaError(os.str());
    }
    MatrixPoly poly;
    for (const auto& t : j["terms"]) {
        if (!t.is_object() || !t.contains("entry") || !t.contains("powers") || !t.contains("coeff"))
            throw SchemaError("each term needs 'entry', 'powers' and 'coeff'");
        const auto& e = t["entry"];
        const auto& pw = t["powers"];
        if (!e.is_array() || e.size() != 2 || !pw.is_array() || pw.size() != 4)
            throw SchemaError("'entry' must have 2 indices and 'powers' 4 exponents");
        PolyTerm term;
        term.row = e[0].get<int>();
        term.col = e[1].get<int>();
        if (term.row < 0 || term.row > 1 || term.col < 0 || term.col > 1)
            throw SchemaError("matrix entry indices must be 0 or 1");
        int total = 0;
        for (int i = 0; i < 4; ++i) {
            term.powers[i] = pw[i].get<int>();
            if (term.powers[i] < 0 || term.powers[i] > 16)
                throw SchemaError("monomial powers must lie in [0, 16]");
            total += term.powers[i];
        }
        if (total == 0)
            throw SchemaError("constant terms are not allowed: the structure must equal the standard one at the origin");
        if (!t["coeff"].is_number()) throw SchemaError("'coeff' must be a number");
        term.coeff = t["coeff"].get<double>();
        if (!std::isfinite(term.coeff)) throw SchemaError("'coeff' must be finite");
        poly.terms.push_back(term);
    }
    return poly;
}

inline nlohmann::ordered_json matrix_poly_json(const MatrixPoly& p) {
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const PolyTerm& t : p.terms) {
        nlohmann::ordered_json jt;
        jt["entry"] = {t.row, t.col};
        jt["powers"] = {t.powers[0], t.powers[1], t.powers[2], t.powers[3]};
        jt["coeff"] = t.coeff;
        terms.push_back(jt);
    }
    nlohmann::ordered_json out;
    out["terms"] = terms;
    return out;
}

}  // namespace detail

inline AlmostComplexStructure parse_structure(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("structure file must contain a JSON object");
    for (const auto& kv : j.items()) {
        const std::string& k = kv.key();
        if (k != "description" && k != "epsilon" && k != "A" && k != "B") {
            std::ostringstream os;
            os << "unknown key '" << k << "' in structure";
            throw SchemaError(os.str());
        }
    }
    if (!j.contains("A") || !j.contains("B")) throw SchemaError("structure needs both 'A' and 'B' blocks");
    AlmostComplexStructure s;
    if (j.contains("description")) {
        if (!j["description"].is_string()) throw SchemaError("'description' must be a string");
        s.description = j["description"].get<std::string>();
    }
    if (j.contains("epsilon")) {
        if (!j["epsilon"].is_number()) throw SchemaError("'epsilon' must be a number");
        s.epsilon = j["epsilon"].get<double>();
        if (!(s.epsilon > 0.0) || !std::isfinite(s.epsilon)) throw SchemaError("'epsilon' must be positive and finite");
    }
    s.a = detail::parse_matrix_poly(j["A"], "A");
    s.b = detail::parse_matrix_poly(j["B"], "B");
    return s;
}

inline nlohmann::ordered_json to_json(const AlmostComplexStructure& s) {
    nlohmann::ordered_json j;
    j["description"] = s.description;
    j["epsilon"] = s.epsilon;
    j["A"] = detail::matrix_poly_json(s.a);
    j["B"] = detail::matrix_poly_json(s.b);
    return j;
}

inline AlmostComplexStructure load_structure(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::ostringstream os;
        os << "cannot open structure file '" << path << "'";
        throw SchemaError(os.str());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        std::ostringstream os;
        os << "structure file '" << path << "' is not valid JSON: " << e.what();
        throw SchemaError(os.str());
    }
    return parse_structure(j);
}

inline void save_structure(const AlmostComplexStructure& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        std::ostringstream os;
        os << "cannot write structure file '" << path << "'";
        throw SchemaError(os.str());
    }
    out << to_json(s).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// reference structures
// ---------------------------------------------------------------------------

/// The integrable standard structure: both blocks are exactly J_st.
inline AlmostComplexStructure standard_structure() {
    AlmostComplexStructure s;
    s.description = "standard integrable structure on the bidisk";
    return s;
}

/// The fixed non-integrable reference perturbation used by the stability
/// probes: off-diagonal couplings through the opposite coordinate, so neither
/// block is constant and the two disk equations genuinely interact.
inline AlmostComplexStructure reference_perturbation() {
    AlmostComplexStructure s;
    s.description = "reference polynomial perturbation coupling the two coordinates";
    s.a.terms.push_back(PolyTerm{0, 0, {0, 0, 1, 0}, 0.4});   // x2 in A_00
    s.a.terms.push_back(PolyTerm{1, 1, {0, 0, 0, 1}, -0.4});  // y2 in A_11
    s.a.terms.push_back(PolyTerm{0, 1, {0, 0, 0, 1}, 0.2});   // y2 in A_01
    s.b.terms.push_back(PolyTerm{0, 0, {0, 1, 0, 0}, 0.4});   // y1 in B_00
    s.b.terms.push_back(PolyTerm{1, 1, {1, 0, 0, 0}, -0.4});  // x1 in B_11
    s.b.terms.push_back(PolyTerm{1, 0, {1, 0, 0, 0}, 0.2});   // x1 in B_10
    return s;
}

}  // namespace jholo
