#ifndef OPGRAPH_CLASSIFY_HPP
#define OPGRAPH_CLASSIFY_HPP

#include <optional>
#include <string>
#include <vector>

#include "opgraph/node.hpp"

namespace opg {

enum class ReadoutStep { disperse, integrate, subsample, psf, detect };
const char* readout_step_name(ReadoutStep s);
ReadoutStep readout_step_from_name(const std::string& s);

/// Answers to the classification questions for one physics stage.
struct StageDescriptor {
    bool is_pointwise_nonlinear = false;    // Q0
    bool is_free_space_evolution = false;   // Q1
    bool interacts_with_matter = false;     // Q2
    bool changes_direction_or_energy = false; // Q2a
    bool maps_space_to_measurement = false; // Q3
    bool is_line_integral = false;          // Q3a
    std::optional<ReadoutStep> readout_step;
};

enum class StageClass {
    transform,             // Q0 -> Lambda
    propagate_or_convolve, // Q1 -> P or C
    scatter,               // Q2a yes -> R
    modulate,              // Q2a no -> M
    project,               // Q3a yes -> Pi
    encode,                // Q3a no -> F
    disperse,              // readout W
    accumulate,            // readout Sigma
    sample,                // readout S
    psf_convolve,          // readout C
    detect,                // readout D
};
const char* stage_class_name(StageClass c);

/// One primitive kind per stage class (propagate_or_convolve resolves to P).
Kind stage_class_kind(StageClass c);

/// Apply the decision table Q0 -> Q1 -> Q2/Q2a -> Q3/Q3a -> readout.
/// Throws ClassificationError on contradictory descriptors.
StageClass classify_stage(const StageDescriptor& d);

/// Classify a whole physics chain into primitive kinds.
std::vector<Kind> classify_chain(const std::vector<StageDescriptor>& stages);

} // namespace opg

#endif
