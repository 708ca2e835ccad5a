#pragma once

// Deterministic text formats. JSON documents carry systems, orbit traces,
// and lattice data; CSV tables carry the two reduced orbits. Every number
// prints with 17 significant digits, so parsing recovers the exact double
// and identical inputs produce byte-identical output.

#include <climits>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "schlesinger/a2star.hpp"
#include "schlesinger/dpv.hpp"
#include "schlesinger/errors.hpp"
#include "schlesinger/fuchsian.hpp"
#include "schlesinger/lattice.hpp"
#include "schlesinger/transform.hpp"

namespace schlesinger {

inline std::string format_number(double value) {
    if (!std::isfinite(value))
        throw ParseError("cannot serialize a non-finite number");
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

namespace detail {

using Json = nlohmann::ordered_json;

inline void append_quoted(std::string& out, const std::string& text) {
    out += '"';
    for (const char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buffer[8];
                    std::snprintf(buffer, sizeof buffer, "\\u%04x",
                                  static_cast<unsigned>(c));
                    out += buffer;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

inline void append_complex(std::string& out, Complex z) {
    out += '[';
    out += format_number(z.real());
    out += ',';
    out += format_number(z.imag());
    out += ']';
}

inline void append_complex_matrix(std::string& out, const Matrix& m) {
    out += '[';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (r) out += ',';
        out += '[';
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            append_complex(out, m(r, c));
        }
        out += ']';
    }
    out += ']';
}

inline void append_system_fields(std::string& out, const FuchsianSystem& system) {
    out += "\"matrix_size\":";
    out += std::to_string(system.matrix_size());
    out += ",\"poles\":[";
    for (int i = 0; i < system.pole_count(); ++i) {
        if (i) out += ',';
        append_complex(out, system.pole(i));
    }
    out += "],\"residues\":[";
    for (int i = 0; i < system.pole_count(); ++i) {
        if (i) out += ',';
        append_complex_matrix(out, system.residue(i));
    }
    out += ']';
}

inline void append_scheme(std::string& out, const RiemannScheme& scheme) {
    out += "{\"points\":[";
    for (std::size_t i = 0; i < scheme.points.size(); ++i) {
        if (i) out += ',';
        const PointSpectrum& point = scheme.points[i];
        out += "{\"at_infinity\":";
        out += point.at_infinity ? "true" : "false";
        if (!point.at_infinity) {
            out += ",\"location\":";
            append_complex(out, point.location);
        }
        out += ",\"exponents\":[";
        for (std::size_t g = 0; g < point.groups.size(); ++g) {
            if (g) out += ',';
            out += "{\"value\":";
            append_complex(out, point.groups[g].value);
            out += ",\"multiplicity\":";
            out += std::to_string(point.groups[g].multiplicity);
            out += '}';
        }
        out += "]}";
    }
    out += "],\"spectral_type\":[";
    for (std::size_t i = 0; i < scheme.spectral_type.size(); ++i) {
        if (i) out += ',';
        out += '[';
        for (std::size_t k = 0; k < scheme.spectral_type[i].size(); ++k) {
            if (k) out += ',';
            out += std::to_string(scheme.spectral_type[i][k]);
        }
        out += ']';
    }
    out += "],\"fuchs_sum\":";
    append_complex(out, scheme.fuchs_sum);
    out += '}';
}

inline Json parse_document(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
}

inline const Json& member(const Json& j, const char* key) {
    if (!j.is_object()) throw ParseError("expected a JSON object");
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing field: ") + key);
    return *it;
}

inline Complex parse_complex(const Json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError("a complex entry is a [re, im] pair of numbers");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Matrix parse_complex_matrix(const Json& j, int size, const std::string& what) {
    const std::string shape =
        what + " must be a " + std::to_string(size) + " x " + std::to_string(size) +
        " table of [re, im] pairs";
    if (!j.is_array() || static_cast<int>(j.size()) != size) throw ParseError(shape);
    Matrix m(size, size);
    for (int r = 0; r < size; ++r) {
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != size)
            throw ParseError(shape);
        for (int c = 0; c < size; ++c)
            m(r, c) = parse_complex(row[static_cast<std::size_t>(c)]);
    }
    return m;
}

inline long long parse_integer(const Json& j) {
    if (j.is_number_unsigned() &&
        j.get<unsigned long long>() > static_cast<unsigned long long>(LLONG_MAX))
        throw ParseError("integer out of range");
    if (!j.is_number_integer()) throw ParseError("expected an integer");
    return j.get<long long>();
}

inline IntMatrix parse_integer_matrix(const Json& j, int size, const std::string& what) {
    const std::string shape = what + " needs a " + std::to_string(size) + " x " +
                              std::to_string(size) + " integer table";
    if (!j.is_array() || static_cast<int>(j.size()) != size) throw ParseError(shape);
    IntMatrix m(size, size);
    for (int r = 0; r < size; ++r) {
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != size)
            throw ParseError(shape);
        for (int c = 0; c < size; ++c)
            m(r, c) = parse_integer(row[static_cast<std::size_t>(c)]);
    }
    return m;
}

inline void append_integer_matrix(std::string& out, const IntMatrix& m) {
    out += '[';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (r) out += ',';
        out += '[';
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += std::to_string(m(r, c));
        }
        out += ']';
    }
    out += ']';
}

}  // namespace detail

inline std::string system_to_json(const FuchsianSystem& system) {
    std::string out = "{";
    detail::append_system_fields(out, system);
    out += '}';
    return out;
}

inline FuchsianSystem system_from_json(const std::string& text) {
    const detail::Json j = detail::parse_document(text);
    const detail::Json& size = detail::member(j, "matrix_size");
    if (!size.is_number_integer() || size.get<long long>() < 1 ||
        size.get<long long>() > 1024)
        throw ParseError("matrix_size must be a positive integer");
    const int m = static_cast<int>(size.get<long long>());

    const detail::Json& poles_field = detail::member(j, "poles");
    if (!poles_field.is_array() || poles_field.empty())
        throw ParseError("poles must be a nonempty array");
    std::vector<Complex> poles;
    for (const auto& entry : poles_field) poles.push_back(detail::parse_complex(entry));

    const detail::Json& residue_field = detail::member(j, "residues");
    if (!residue_field.is_array() || residue_field.size() != poles.size())
        throw ParseError("residues must list one residue per pole");
    std::vector<Matrix> residues;
    for (std::size_t i = 0; i < residue_field.size(); ++i)
        residues.push_back(detail::parse_complex_matrix(
            residue_field[i], m, "residue " + std::to_string(i)));

    return build_system(std::move(poles), std::move(residues));
}

inline std::string orbit_to_json(const std::vector<OrbitRecord>& trace) {
    std::string out = "[";
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if (k) out += ',';
        out += "{\"step\":";
        out += std::to_string(trace[k].step);
        out += ',';
        detail::append_system_fields(out, trace[k].system);
        out += ",\"riemann_scheme\":";
        detail::append_scheme(out, trace[k].scheme);
        out += '}';
    }
    out += ']';
    return out;
}

namespace detail {

inline void append_cells(std::string& out, Complex z) {
    out += ',';
    out += format_number(z.real());
    out += ',';
    out += format_number(z.imag());
}

}  // namespace detail

inline std::string dpv_csv_header() {
    return "step,p_re,p_im,q_re,q_im,f_re,f_im,g_re,g_im,"
           "theta1_re,theta1_im,thetat_re,thetat_im";
}

inline std::string dpv_csv_row(int step, const DPVState& state,
                               const StandardDPVState& standard,
                               const DPVParameters& prm) {
    std::string out = std::to_string(step);
    detail::append_cells(out, state.p);
    detail::append_cells(out, state.q);
    detail::append_cells(out, standard.f);
    detail::append_cells(out, standard.g);
    detail::append_cells(out, prm.theta1);
    detail::append_cells(out, prm.thetat);
    return out;
}

inline std::string a2star_csv_header() {
    return "step,x_re,x_im,y_re,y_im,f_re,f_im,g_re,g_im,"
           "theta11_re,theta11_im,theta12_re,theta12_im,"
           "theta21_re,theta21_im,theta22_re,theta22_im,"
           "kappa1_re,kappa1_im,kappa2_re,kappa2_im,kappa3_re,kappa3_im";
}

inline std::string a2star_csv_row(int step, const A2State& state,
                                  const StandardA2State& standard,
                                  const A2Parameters& prm) {
    std::string out = std::to_string(step);
    detail::append_cells(out, state.x);
    detail::append_cells(out, state.y);
    detail::append_cells(out, standard.f);
    detail::append_cells(out, standard.g);
    detail::append_cells(out, prm.theta11);
    detail::append_cells(out, prm.theta12);
    detail::append_cells(out, prm.theta21);
    detail::append_cells(out, prm.theta22);
    detail::append_cells(out, prm.kappa1);
    detail::append_cells(out, prm.kappa2);
    detail::append_cells(out, prm.kappa3);
    return out;
}

struct LatticeDocument {
    LatticeBasis basis;
    std::vector<std::pair<std::string, LatticeClass>> classes;
    std::vector<std::pair<std::string, LatticeAction>> actions;
};

inline std::string lattice_to_json(const LatticeDocument& doc) {
    std::string out = "{\"basis\":[";
    for (std::size_t i = 0; i < doc.basis.labels().size(); ++i) {
        if (i) out += ',';
        detail::append_quoted(out, doc.basis.labels()[i]);
    }
    out += "],\"gram\":";
    detail::append_integer_matrix(out, doc.basis.gram());
    out += ",\"classes\":{";
    for (std::size_t i = 0; i < doc.classes.size(); ++i) {
        if (i) out += ',';
        const auto& [name, cls] = doc.classes[i];
        if (!(cls.basis == doc.basis))
            throw BasisMismatch("class " + name + " lives on a different basis");
        detail::append_quoted(out, name);
        out += ":[";
        for (Eigen::Index k = 0; k < cls.coeffs.size(); ++k) {
            if (k) out += ',';
            out += std::to_string(cls.coeffs(k));
        }
        out += ']';
    }
    out += "},\"actions\":{";
    for (std::size_t i = 0; i < doc.actions.size(); ++i) {
        if (i) out += ',';
        const auto& [name, action] = doc.actions[i];
        if (!(action.basis() == doc.basis))
            throw BasisMismatch("action " + name + " lives on a different basis");
        detail::append_quoted(out, name);
        out += ':';
        detail::append_integer_matrix(out, action.matrix());
    }
    out += "}}";
    return out;
}

inline LatticeDocument lattice_from_json(const std::string& text) {
    const detail::Json j = detail::parse_document(text);

    const detail::Json& label_field = detail::member(j, "basis");
    if (!label_field.is_array() || label_field.empty())
        throw ParseError("basis must be a nonempty array of labels");
    std::vector<std::string> labels;
    for (const auto& entry : label_field) {
        if (!entry.is_string())
            throw ParseError("every basis label must be a string");
        labels.push_back(entry.get<std::string>());
    }
    const int rank = static_cast<int>(labels.size());
    IntMatrix gram = detail::parse_integer_matrix(detail::member(j, "gram"), rank, "gram");
    const LatticeBasis basis(std::move(labels), std::move(gram));

    LatticeDocument doc{basis, {}, {}};
    const detail::Json& class_field = detail::member(j, "classes");
    if (!class_field.is_object())
        throw ParseError("classes must be an object of named integer vectors");
    for (const auto& [name, value] : class_field.items()) {
        if (!value.is_array() || static_cast<int>(value.size()) != rank)
            throw ParseError("class " + name + " needs " + std::to_string(rank) +
                             " coefficients");
        IntVector coeffs(rank);
        for (int k = 0; k < rank; ++k)
            coeffs(k) = detail::parse_integer(value[static_cast<std::size_t>(k)]);
        doc.classes.emplace_back(name, LatticeClass{basis, std::move(coeffs)});
    }

    const detail::Json& action_field = detail::member(j, "actions");
    if (!action_field.is_object())
        throw ParseError("actions must be an object of named integer matrices");
    for (const auto& [name, value] : action_field.items())
        doc.actions.emplace_back(
            name, LatticeAction(basis, detail::parse_integer_matrix(
                                           value, rank, "action " + name)));
    return doc;
}

}  // namespace schlesinger
