#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "tconn/connection.hpp"
#include "tconn/errors.hpp"
#include "tconn/i2_forms.hpp"
#include "tconn/n2_forms.hpp"
#include "tconn/reduce.hpp"

namespace tconn {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Canonical writer: sorted keys (nlohmann objects iterate sorted), decimal
// strings for exact scalars, %.17g for floats. Identical values give
// identical bytes.
// ---------------------------------------------------------------------------

namespace jsondetail {

inline void escape_string(const std::string& s, std::string& out) {
    out += '"';
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    out += '"';
}

inline void dump(const Json& j, std::string& out) {
    switch (j.type()) {
        case Json::value_t::null: out += "null"; break;
        case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
        case Json::value_t::number_integer:
            out += std::to_string(j.get<long long>());
            break;
        case Json::value_t::number_unsigned:
            out += std::to_string(j.get<unsigned long long>());
            break;
        case Json::value_t::number_float: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
            out += buf;
            break;
        }
        case Json::value_t::string: escape_string(j.get<std::string>(), out); break;
        case Json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ',';
                first = false;
                dump(v, out);
            }
            out += ']';
            break;
        }
        case Json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                escape_string(it.key(), out);
                out += ':';
                dump(it.value(), out);
            }
            out += '}';
            break;
        }
        default: throw SchemaError("unserializable JSON value");
    }
}

}  // namespace jsondetail

inline std::string canonical_dump(const Json& j) {
    std::string out;
    jsondetail::dump(j, out);
    out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// Scalars: exact as [re_num, re_den, im_num, im_den] decimal strings,
// approximate as [re, im] doubles.
// ---------------------------------------------------------------------------

inline Json to_json(const GaussianRational& v) {
    return Json::array({numerator(v.re()).str(), denominator(v.re()).str(),
                        numerator(v.im()).str(), denominator(v.im()).str()});
}

inline Json to_json(const ApproxComplex& v) {
    return Json::array({v.re(), v.im()});
}

template <class F>
F scalar_from_json(const Json& j);

template <>
inline GaussianRational scalar_from_json<GaussianRational>(const Json& j) {
    if (!j.is_array() || j.size() != 4)
        throw SchemaError("exact scalar must be [re_num, re_den, im_num, im_den]");
    auto part = [&](int i) -> BigInt {
        const Json& v = j[i];
        try {
            if (v.is_string()) return BigInt(v.get<std::string>());
            if (v.is_number_integer()) return BigInt(v.get<long long>());
        } catch (...) {
        }
        throw SchemaError("scalar component must be a decimal-string integer");
    };
    BigInt rd = part(1), id = part(3);
    if (rd == 0 || id == 0) throw SchemaError("scalar denominator is zero");
    return {BigRat(part(0), rd), BigRat(part(2), id)};
}

template <>
inline ApproxComplex scalar_from_json<ApproxComplex>(const Json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw SchemaError("float scalar must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

// ---------------------------------------------------------------------------
// Series and matrices as sorted term lists
// ---------------------------------------------------------------------------

template <class F>
Json to_json(const TruncSeries<F>& s) {
    Json terms = Json::array();
    const Orders& o = s.orders();
    for (int kz = 0; kz <= o.z; ++kz)
        for (int k1 = 0; k1 <= o.t1; ++k1)
            for (int k2 = 0; k2 <= o.t2; ++k2) {
                const F& c = s.at(k1, k2, kz);
                if (c.is_zero()) continue;
                Json t;
                t["t1"] = k1;
                t["t2"] = k2;
                t["z"] = kz;
                t["c"] = to_json(c);
                terms.push_back(std::move(t));
            }
    return terms;
}

template <class F>
TruncSeries<F> series_from_json(const Json& j, const Orders& o) {
    if (!j.is_array()) throw SchemaError("series must be an array of terms");
    TruncSeries<F> s(o);
    for (const auto& t : j) {
        if (!t.is_object() || !t.contains("c")) throw SchemaError("series term needs \"c\"");
        auto deg = [&](const char* k) -> int {
            if (!t.contains(k)) return 0;
            if (!t[k].is_number_integer()) throw SchemaError("term exponent must be an integer");
            int v = t[k].get<int>();
            if (v < 0) throw SchemaError("term exponent must be nonnegative");
            return v;
        };
        int k1 = deg("t1"), k2 = deg("t2"), kz = deg("z");
        if (k1 > o.t1 || k2 > o.t2 || kz > o.z)
            throw SchemaError("term exponent exceeds the truncation orders");
        s.at(k1, k2, kz) += scalar_from_json<F>(t["c"]);
    }
    return s;
}

template <class F>
Json to_json(const Mat2Series<F>& m) {
    Json terms = Json::array();
    const Orders& o = m.orders();
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
            for (int kz = 0; kz <= o.z; ++kz)
                for (int k1 = 0; k1 <= o.t1; ++k1)
                    for (int k2 = 0; k2 <= o.t2; ++k2) {
                        const F& c = m.at(i, j).at(k1, k2, kz);
                        if (c.is_zero()) continue;
                        Json t;
                        t["i"] = i;
                        t["j"] = j;
                        t["t1"] = k1;
                        t["t2"] = k2;
                        t["z"] = kz;
                        t["c"] = to_json(c);
                        terms.push_back(std::move(t));
                    }
    return terms;
}

template <class F>
Mat2Series<F> matrix_from_json(const Json& j, const Orders& o) {
    if (!j.is_array()) throw SchemaError("matrix must be an array of terms");
    Mat2Series<F> m(o);
    for (const auto& t : j) {
        if (!t.is_object() || !t.contains("i") || !t.contains("j") || !t.contains("c"))
            throw SchemaError("matrix term needs \"i\", \"j\", \"c\"");
        int i = t["i"].get<int>(), jj = t["j"].get<int>();
        if (i < 1 || i > 2 || jj < 1 || jj > 2)
            throw SchemaError("matrix indices must lie in {1, 2}");
        auto deg = [&](const char* k) -> int {
            if (!t.contains(k)) return 0;
            int v = t[k].get<int>();
            if (v < 0) throw SchemaError("term exponent must be nonnegative");
            return v;
        };
        int k1 = deg("t1"), k2 = deg("t2"), kz = deg("z");
        if (k1 > o.t1 || k2 > o.t2 || kz > o.z)
            throw SchemaError("term exponent exceeds the truncation orders");
        m.at(i, jj).at(k1, k2, kz) += scalar_from_json<F>(t["c"]);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Germ, orders, structures
// ---------------------------------------------------------------------------

inline Json to_json(const Germ& g) {
    Json j;
    j["kind"] = g.is_i2() ? "I2" : "N2";
    if (g.is_i2()) j["m"] = g.m;
    return j;
}

inline Germ germ_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind")) throw SchemaError("germ needs \"kind\"");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "N2") return Germ::N2();
    if (kind == "I2") {
        if (!j.contains("m") || !j["m"].is_number_integer())
            throw SchemaError("I2 germ needs integer \"m\"");
        int m = j["m"].get<int>();
        if (m < 3) throw SchemaError("I2 germ needs m >= 3");
        return Germ::I2(m);
    }
    throw SchemaError("germ kind must be \"I2\" or \"N2\"");
}

inline Json to_json(const Orders& o) {
    Json j;
    j["t1"] = o.t1;
    j["t2"] = o.t2;
    j["z"] = o.z;
    return j;
}

inline Orders orders_from_json(const Json& j) {
    if (!j.is_object()) throw SchemaError("orders must be an object");
    Orders o;
    for (auto [key, dst] : {std::pair<const char*, int*>{"t1", &o.t1},
                            {"t2", &o.t2},
                            {"z", &o.z}}) {
        if (!j.contains(key) || !j[key].is_number_integer())
            throw SchemaError(std::string("orders needs integer \"") + key + "\"");
        *dst = j[key].get<int>();
        if (*dst < 0) throw SchemaError("orders must be nonnegative");
    }
    return o;
}

template <class F>
Json to_json_structure(const TStructure<F>& s) {
    Json j;
    j["germ"] = to_json(s.germ);
    j["orders"] = to_json(s.orders);
    j["field"] = F::is_exact ? "exact" : "float";
    j["A1"] = to_json(s.A1);
    j["A2"] = to_json(s.A2);
    return j;
}

template <class F>
TStructure<F> structure_from_json(const Json& j, bool unchecked_flag = false) {
    if (!j.is_object()) throw SchemaError("structure must be an object");
    for (const char* key : {"germ", "orders", "A1", "A2"})
        if (!j.contains(key))
            throw SchemaError(std::string("structure is missing \"") + key + "\"");
    Germ g = germ_from_json(j["germ"]);
    Orders o = orders_from_json(j["orders"]);
    if (j.contains("field")) {
        std::string f = j["field"].get<std::string>();
        if (f != (F::is_exact ? "exact" : "float"))
            throw SchemaError("structure field kind does not match the session field");
    }
    bool unchecked = unchecked_flag;
    if (j.contains("unchecked")) unchecked = unchecked || j["unchecked"].get<bool>();
    Mat2Series<F> A1 = matrix_from_json<F>(j["A1"], o);
    Mat2Series<F> A2 = matrix_from_json<F>(j["A2"], o);
    return make_structure(g, o, std::move(A1), std::move(A2), unchecked);
}

// ---------------------------------------------------------------------------
// Certificates, normal forms, classes
// ---------------------------------------------------------------------------

template <class F>
Json to_json(const GaugeCertificate<F>& cert) {
    Json steps = Json::array();
    for (const auto& step : cert.steps) {
        Json s;
        if (std::holds_alternative<GaugeStep<F>>(step)) {
            s["type"] = "gauge";
            s["T"] = to_json(std::get<GaugeStep<F>>(step).T);
        } else {
            const auto& bc = std::get<BaseChangeStep<F>>(step);
            s["type"] = "base_change";
            s["lambda"] = to_json(bc.lam);
            s["T"] = to_json(bc.T);
        }
        steps.push_back(std::move(s));
    }
    Json j;
    j["steps"] = std::move(steps);
    return j;
}

template <class F>
GaugeCertificate<F> certificate_from_json(const Json& j, const Orders& o) {
    if (!j.is_object() || !j.contains("steps") || !j["steps"].is_array())
        throw SchemaError("certificate needs a \"steps\" array");
    GaugeCertificate<F> cert;
    for (const auto& s : j["steps"]) {
        if (!s.is_object() || !s.contains("type"))
            throw SchemaError("certificate step needs \"type\"");
        std::string type = s["type"].get<std::string>();
        if (type == "gauge") {
            if (!s.contains("T")) throw SchemaError("gauge step needs \"T\"");
            cert.steps.push_back(GaugeStep<F>{matrix_from_json<F>(s["T"], o)});
        } else if (type == "base_change") {
            if (!s.contains("T") || !s.contains("lambda"))
                throw SchemaError("base_change step needs \"lambda\" and \"T\"");
            cert.steps.push_back(BaseChangeStep<F>{
                series_from_json<F>(s["lambda"], o), matrix_from_json<F>(s["T"], o)});
        } else {
            throw SchemaError("unknown certificate step type: " + type);
        }
    }
    return cert;
}

template <class F>
Json to_json(const PreliminaryForm<F>& p, bool emit_cert) {
    Json j;
    j["germ"] = to_json(p.germ);
    j["f"] = to_json(p.f);
    if (emit_cert) j["cert"] = to_json(p.cert);
    return j;
}

template <class F>
Json to_json(const I2NormalForm<F>& nf) {
    Json j;
    j["m"] = nf.m;
    j["ftilde"] = to_json(nf.ftilde);
    j["tau1"] = to_json(nf.tau1);
    j["tau2"] = to_json(nf.tau2);
    j["meta"] = Json{{"formal", true}, {"reliable_z", nf.reliable_z}};
    return j;
}

template <class F>
Json to_json(const N2Class<F>& c, bool emit_cert) {
    Json j;
    j["label"] = to_string(c.label);
    if (c.label == N2Label::R) {
        j["r"] = c.r;
        Json slices = Json::array();
        for (const auto& s : c.slices) slices.push_back(to_json(s));
        j["slices"] = std::move(slices);
    }
    if (emit_cert) j["cert"] = to_json(c.cert);
    j["meta"] = Json{{"formal", true},
                     {"reliable_z", c.reliable_z},
                     {"truncation_caveat", c.truncation_caveat}};
    return j;
}

inline Json to_json(const CertificateReport& r) {
    Json steps = Json::array();
    for (const auto& s : r.steps) {
        Json js;
        js["relation_residual"] = s.relation_residual;
        js["ok"] = s.ok;
        if (!s.error.empty()) js["error"] = s.error;
        steps.push_back(std::move(js));
    }
    Json j;
    j["steps"] = std::move(steps);
    j["final_mismatch"] = r.final_mismatch;
    j["pass"] = r.pass;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

}  // namespace tconn
