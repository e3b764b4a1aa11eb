#include "mobelcov/params_io.hpp"

#include <fstream>

#include "mobelcov/errors.hpp"

namespace mobelcov {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ConfigError(std::string("parameter file is missing field '") + key + "'");
    }
    return obj.at(key);
}

double scalar(const json& obj, const char* key) {
    const json& v = field(obj, key);
    if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

Vector vector_of(const json& obj, const char* key, int groups) {
    const json& v = field(obj, key);
    if (v.is_number()) return Vector::Constant(groups, v.get<double>());
    if (!v.is_array()) throw ConfigError(std::string("field '") + key + "' must be a number or array");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ConfigError(std::string("field '") + key + "' has a non-numeric entry");
        out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
}

Matrix matrix_of(const json& obj, const char* key) {
    const json& rows = field(obj, key);
    if (!rows.is_array() || rows.empty()) throw ConfigError(std::string("matrix '") + key + "' must be a non-empty array");
    const std::size_t n = rows.size();
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!rows[i].is_array() || rows[i].size() != n) {
            throw ConfigError(std::string("matrix '") + key + "' must be square");
        }
        for (std::size_t j = 0; j < n; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
        }
    }
    return m;
}

json rows_of(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json values_of(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

void ModelParameters::validate() const {
    ages.validate();
    contacts.validate();
    if (contacts.groups() != ages.groups()) throw ConfigError("contact matrices do not match the age structure");
    epi.validate(ages.groups());
}

ModelParameters parse_model_parameters(const json& doc) {
    ModelParameters out;
    const json& ages = field(doc, "age_structure");
    out.ages.population = vector_of(ages, "population", 0);
    const int groups = out.ages.groups();
    if (ages.contains("labels")) out.ages.labels = ages.at("labels").get<std::vector<std::string>>();

    const json& epi = field(doc, "epi");
    out.epi.q_a = scalar(epi, "q_a");
    out.epi.q_s = scalar(epi, "q_s");
    out.epi.gamma_rate = scalar(epi, "gamma_rate");
    out.epi.theta = scalar(epi, "theta");
    out.epi.p = vector_of(epi, "p", groups);
    out.epi.psi = vector_of(epi, "psi", groups);
    out.epi.omega = vector_of(epi, "omega", groups);
    out.epi.phi1 = vector_of(epi, "phi1", groups);
    out.epi.delta1 = vector_of(epi, "delta1", groups);
    out.epi.delta2 = vector_of(epi, "delta2", groups);
    out.epi.delta3 = vector_of(epi, "delta3", groups);
    out.epi.delta4 = vector_of(epi, "delta4", groups);
    out.epi.tau1 = vector_of(epi, "tau1", groups);
    out.epi.tau2 = vector_of(epi, "tau2", groups);
    out.epi.beta0_star = epi.value("beta0_star", -5.0);
    // No default: the slope of the compliance ramp must come from the file.
    out.epi.beta1_star = scalar(epi, "beta1_star");
    out.epi.h = epi.value("h", 1.0 / 24.0);

    const json& cm = field(doc, "contact_matrices");
    out.contacts.home = matrix_of(cm, "home");
    out.contacts.work = matrix_of(cm, "work");
    out.contacts.transport = matrix_of(cm, "transport");
    out.contacts.school = matrix_of(cm, "school");
    out.contacts.leisure = matrix_of(cm, "leisure");
    out.contacts.other = matrix_of(cm, "other");
    out.contacts.asym = matrix_of(cm, "asym");
    out.contacts.sym = matrix_of(cm, "sym");

    out.validate();
    return out;
}

ModelParameters load_model_parameters(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open parameter file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("parameter file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_model_parameters(doc);
}

json to_json(const ModelParameters& p) {
    json doc;
    doc["format"] = "mobelcov-params";
    doc["version"] = 1;
    doc["age_structure"] = {{"labels", p.ages.labels}, {"population", values_of(p.ages.population)}};
    doc["epi"] = {{"q_a", p.epi.q_a},           {"q_s", p.epi.q_s},
                  {"gamma_rate", p.epi.gamma_rate}, {"theta", p.epi.theta},
                  {"p", values_of(p.epi.p)},     {"psi", values_of(p.epi.psi)},
                  {"omega", values_of(p.epi.omega)}, {"phi1", values_of(p.epi.phi1)},
                  {"delta1", values_of(p.epi.delta1)}, {"delta2", values_of(p.epi.delta2)},
                  {"delta3", values_of(p.epi.delta3)}, {"delta4", values_of(p.epi.delta4)},
                  {"tau1", values_of(p.epi.tau1)}, {"tau2", values_of(p.epi.tau2)},
                  {"beta0_star", p.epi.beta0_star}, {"beta1_star", p.epi.beta1_star},
                  {"h", p.epi.h}};
    doc["contact_matrices"] = {{"home", rows_of(p.contacts.home)},
                               {"work", rows_of(p.contacts.work)},
                               {"transport", rows_of(p.contacts.transport)},
                               {"school", rows_of(p.contacts.school)},
                               {"leisure", rows_of(p.contacts.leisure)},
                               {"other", rows_of(p.contacts.other)},
                               {"asym", rows_of(p.contacts.asym)},
                               {"sym", rows_of(p.contacts.sym)}};
    return doc;
}

}  // namespace mobelcov
