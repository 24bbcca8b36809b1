#include "fluctgeo/corpus.hpp"

#include <stdexcept>

namespace fluctgeo {

const std::vector<MixtureComponent>& corpus_mixture_components() {
    static const std::vector<MixtureComponent> comps{{0.6, -1.2, 0.5}, {0.4, 1.4, 0.6}};
    return comps;
}

Eigen::VectorXd corpus_expfam_theta() {
    Eigen::VectorXd theta(2);
    theta << -2.0, 1.0;  // mean 1, variance 1/2
    return theta;
}

const std::vector<CorpusEntry>& corpus() {
    static const std::vector<CorpusEntry> entries = [] {
        std::vector<CorpusEntry> v;
        v.push_back({"normal", make_normal(0.0, 1.0), true});
        v.push_back({"mixture", make_gaussian_mixture(corpus_mixture_components()), true});
        v.push_back({"triangle", make_triangle(1.0), false});
        v.push_back({"uniform", make_uniform(0.0, 1.0), false});
        v.push_back({"expfam", gaussian_natural_family().at(corpus_expfam_theta()), true});
        return v;
    }();
    return entries;
}

std::vector<CorpusEntry> conforming_corpus() {
    std::vector<CorpusEntry> v;
    for (const auto& e : corpus())
        if (e.axiom4_conforming) v.push_back(e);
    return v;
}

const CorpusEntry& corpus_entry(const std::string& name) {
    for (const auto& e : corpus())
        if (e.name == name) return e;
    throw std::invalid_argument("unknown corpus family: " + name);
}

}  // namespace fluctgeo
