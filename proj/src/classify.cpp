#include "opgraph/classify.hpp"

#include "opgraph/errors.hpp"

namespace opg {

const char* readout_step_name(ReadoutStep s) {
    switch (s) {
        case ReadoutStep::disperse: return "disperse";
        case ReadoutStep::integrate: return "integrate";
        case ReadoutStep::subsample: return "subsample";
        case ReadoutStep::psf: return "psf";
        case ReadoutStep::detect: return "detect";
    }
    return "?";
}

ReadoutStep readout_step_from_name(const std::string& s) {
    if (s == "disperse") return ReadoutStep::disperse;
    if (s == "integrate") return ReadoutStep::integrate;
    if (s == "subsample") return ReadoutStep::subsample;
    if (s == "psf") return ReadoutStep::psf;
    if (s == "detect") return ReadoutStep::detect;
    throw ParseError("unknown readout step '" + s + "'");
}

const char* stage_class_name(StageClass c) {
    switch (c) {
        case StageClass::transform: return "Lambda";
        case StageClass::propagate_or_convolve: return "P-or-C";
        case StageClass::scatter: return "R";
        case StageClass::modulate: return "M";
        case StageClass::project: return "Pi";
        case StageClass::encode: return "F";
        case StageClass::disperse: return "W";
        case StageClass::accumulate: return "Sigma";
        case StageClass::sample: return "S";
        case StageClass::psf_convolve: return "C";
        case StageClass::detect: return "D";
    }
    return "?";
}

Kind stage_class_kind(StageClass c) {
    switch (c) {
        case StageClass::transform: return Kind::transform;
        case StageClass::propagate_or_convolve: return Kind::propagate;
        case StageClass::scatter: return Kind::scatter;
        case StageClass::modulate: return Kind::modulate;
        case StageClass::project: return Kind::project;
        case StageClass::encode: return Kind::encode;
        case StageClass::disperse: return Kind::disperse;
        case StageClass::accumulate: return Kind::accumulate;
        case StageClass::sample: return Kind::sample;
        case StageClass::psf_convolve: return Kind::convolve;
        case StageClass::detect: return Kind::detect;
    }
    throw Error("unreachable stage class");
}

StageClass classify_stage(const StageDescriptor& d) {
    // consistency of the answers
    if (d.is_line_integral && !d.maps_space_to_measurement)
        throw ClassificationError("is_line_integral requires maps_space_to_measurement");
    if (d.changes_direction_or_energy && !d.interacts_with_matter)
        throw ClassificationError("changes_direction_or_energy requires interacts_with_matter");
    const bool physics = d.is_pointwise_nonlinear || d.is_free_space_evolution ||
                         d.interacts_with_matter || d.maps_space_to_measurement;
    if (physics && d.readout_step)
        throw ClassificationError("readout_step set on a physics stage");
    if (!physics && !d.readout_step)
        throw ClassificationError(
            "stage answers no to every question and carries no readout_step");

    if (d.is_pointwise_nonlinear) return StageClass::transform;               // Q0
    if (d.is_free_space_evolution) return StageClass::propagate_or_convolve;  // Q1
    if (d.interacts_with_matter)                                              // Q2 / Q2a
        return d.changes_direction_or_energy ? StageClass::scatter : StageClass::modulate;
    if (d.maps_space_to_measurement)                                          // Q3 / Q3a
        return d.is_line_integral ? StageClass::project : StageClass::encode;
    switch (*d.readout_step) {                                                // readout chain
        case ReadoutStep::disperse: return StageClass::disperse;
        case ReadoutStep::integrate: return StageClass::accumulate;
        case ReadoutStep::subsample: return StageClass::sample;
        case ReadoutStep::psf: return StageClass::psf_convolve;
        case ReadoutStep::detect: return StageClass::detect;
    }
    throw Error("unreachable");
}

std::vector<Kind> classify_chain(const std::vector<StageDescriptor>& stages) {
    std::vector<Kind> kinds;
    kinds.reserve(stages.size());
    for (const auto& s : stages) kinds.push_back(stage_class_kind(classify_stage(s)));
    return kinds;
}

} // namespace opg
