#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "situate/features.hpp"
#include "situate/geometry.hpp"
#include "situate/prob_models.hpp"
#include "situate/rng.hpp"

namespace situate {

// The object categories that make up a situation.
struct SituationSpec {
    std::string name;
    std::vector<std::string> categories;
};

void validate_spec(const SituationSpec& spec);
SituationSpec load_spec(const std::string& path);
void save_spec(const SituationSpec& spec, const std::string& path);

// One labeled image. Positive records carry exactly one box per situation
// category; negative records carry no guarantees.
struct AnnotationRecord {
    std::string image_id;
    ImageDims dims;
    bool is_positive = false;
    std::vector<std::pair<std::string, PixelBox>> boxes;
};

std::vector<AnnotationRecord> load_annotations(const std::string& path,
                                               const SituationSpec& spec);
void save_annotations(const std::vector<AnnotationRecord>& records, const std::string& path);

// Externally computed detector box with a confidence, ingested before a run.
struct PriorProposal {
    std::string image_id;
    std::string category;
    PixelBox box;
    double detector_confidence = 0;
};

using PriorsByImage = std::map<std::string, std::vector<PriorProposal>>;

PriorsByImage load_priors(const std::string& path);
void save_priors(const std::vector<PriorProposal>& priors, const std::string& path);

std::vector<SyntheticScene> load_scenes(const std::string& path);
void save_scenes(const std::vector<SyntheticScene>& scenes, const std::string& path);

// Desk-scale corpus recipe. Categories come from the planted relationship
// model's layout.
struct SynthSpec {
    std::string name;
    int n_train = 100;
    int n_pos_test = 50;
    int n_neg_test = 200;
    GaussianModel planted;
    int distractor_min = 2;
    int distractor_max = 5;
    double detector_slope = 0.9;
    double detector_noise = 0.12;
    int priors_per_category = 10;
    ImageDims dims{640, 480};
    std::uint64_t seed = 1729;

    std::vector<std::string> categories() const;
};

// The corpus used by the tests and the default CLI demo.
SynthSpec default_synth_spec();

struct SynthCorpus {
    std::vector<AnnotationRecord> train;
    std::vector<AnnotationRecord> test; // positives then negatives
    std::vector<PriorProposal> priors;
    std::vector<SyntheticScene> scenes; // every train and test image
};

// Deterministic given (spec, spec.seed). Negatives come in three flavors
// in a 40/40/20 rotation: one category dropped and the rest scrambled,
// all categories sampled independently from their marginals, and
// distractor-only images.
SynthCorpus generate_synthetic(const SynthSpec& spec);

} // namespace situate
