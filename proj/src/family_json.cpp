#include "fluctgeo/family_json.hpp"

#include <set>
#include <stdexcept>

#include "fluctgeo/corpus.hpp"

namespace fluctgeo {

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("family spec: unknown field '" + it.key() + "'");
}

double need_number(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number())
        throw std::invalid_argument("family spec: missing numeric field '" + key + "'");
    return j[key].get<double>();
}

Family1D parse_family1d(const nlohmann::json& j);

Family1D parse_family1d(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw std::invalid_argument("family spec: expected an object with a 'type' string");
    const std::string type = j["type"].get<std::string>();
    if (type == "normal") {
        check_keys(j, {"type", "mu", "sigma"});
        return make_normal(need_number(j, "mu"), need_number(j, "sigma"));
    }
    if (type == "uniform") {
        check_keys(j, {"type", "lo", "hi"});
        return make_uniform(need_number(j, "lo"), need_number(j, "hi"));
    }
    if (type == "triangle") {
        check_keys(j, {"type", "a"});
        return make_triangle(need_number(j, "a"));
    }
    if (type == "mixture") {
        check_keys(j, {"type", "components"});
        if (!j.contains("components") || !j["components"].is_array())
            throw std::invalid_argument("family spec: mixture needs a 'components' array");
        std::vector<MixtureComponent> comps;
        for (const auto& c : j["components"]) {
            check_keys(c, {"weight", "mu", "sigma"});
            comps.push_back(
                {need_number(c, "weight"), need_number(c, "mu"), need_number(c, "sigma")});
        }
        return make_gaussian_mixture(std::move(comps));
    }
    if (type == "expfam") {
        check_keys(j, {"type", "theta"});
        if (!j.contains("theta") || !j["theta"].is_array() || j["theta"].size() != 2)
            throw std::invalid_argument("family spec: expfam needs a 2-element 'theta' array");
        Eigen::VectorXd theta(2);
        theta << j["theta"][0].get<double>(), j["theta"][1].get<double>();
        return gaussian_natural_family().at(theta);
    }
    if (type == "product")
        throw std::invalid_argument("family spec: product factors cannot be nested products");
    throw std::invalid_argument("family spec: unknown type '" + type + "'");
}

}  // namespace

AnyFamily parse_family_json(const nlohmann::json& j) {
    if (j.is_object() && j.contains("type") && j["type"] == "product") {
        check_keys(j, {"type", "factors"});
        if (!j.contains("factors") || !j["factors"].is_array() || j["factors"].size() < 2)
            throw std::invalid_argument("family spec: product needs >= 2 factors");
        std::vector<Family1D> factors;
        for (const auto& f : j["factors"]) factors.push_back(parse_family1d(f));
        return ProductFamily(std::move(factors));
    }
    return parse_family1d(j);
}

AnyFamily parse_family_string(const std::string& text) {
    const std::string prefix = "builtin:";
    if (text.rfind(prefix, 0) == 0) return corpus_entry(text.substr(prefix.size())).family;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("family spec: invalid JSON: ") + e.what());
    }
    return parse_family_json(j);
}

}  // namespace fluctgeo
