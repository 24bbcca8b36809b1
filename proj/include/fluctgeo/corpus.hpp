#pragma once

#include <string>
#include <vector>

#include "fluctgeo/families.hpp"

namespace fluctgeo {

struct CorpusEntry {
    std::string name;
    Family1D family;
    bool axiom4_conforming;  // density and slope vanish at the boundary
};

/// Built-in corpus: the four panel families (gaussian, two-gaussian
/// mixture, triangle, uniform) plus a gaussian exponential-family member in
/// natural coordinates.
const std::vector<CorpusEntry>& corpus();

/// Entries whose density and first derivative vanish at the boundary; the
/// fluctuation theorems and uncertainty bounds apply only to these.
std::vector<CorpusEntry> conforming_corpus();

const CorpusEntry& corpus_entry(const std::string& name);  // throws if unknown

/// Parameters of the built-in mixture entry.
const std::vector<MixtureComponent>& corpus_mixture_components();

/// Natural parameters of the built-in exponential-family entry.
Eigen::VectorXd corpus_expfam_theta();

}  // namespace fluctgeo
