#pragma once

#include <string>

#include "cmcf/field.hpp"

namespace cmcf {

/// CMCF1 snapshot: one text header line
///   CMCF1 n=<n> dims=<N_1,...> h=<h_1,...> origin=<o_1,...> t=<t> far=<f>
/// followed by the raw values as little-endian 64-bit floats, row major
/// with the last axis fastest. Round trips are bit exact.
void write_snapshot(const std::string& path, const ScalarField& field);
ScalarField read_snapshot(const std::string& path);

}  // namespace cmcf
