#pragma once

// Instance documents (JSON, physical units) and the two solution text formats.
//
// Instance: {"base_mva", "reference_bus", "buses", "generators", "lines",
// "contingencies", optional "penalty" and "operating_point"}. Powers are in MW
// and MVAr, marginal costs in $/MWh, line parameters already per-unit. The
// parser converts everything to per-unit on base_mva.
//
// Solutions: plain text, one value per column, angles in radians, shunts as
// susceptance at 1 p.u. Floats are written with 17 significant digits so that
// reading them back reproduces the exact double.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scopf/network.hpp"

namespace scopf::io {

/// Throws SyntaxError (with line/column) or SemanticError (naming the element or invariant).
Network parse_instance(std::string_view text);

/// Either a bare array of contingency objects or a document with a "contingencies" array.
std::vector<Contingency> parse_contingency_list(std::string_view text);

/// Inverse of parse_instance up to floating-point rounding of the unit conversion.
std::string write_instance(const Network& net, double base_mva = 100.0);

std::string format_double(double x);

/// Throws FormatError when the state is not dimensioned to the network or theta_ref != 0.
std::string write_base_solution(const Network& net, const BaseState& state);
/// Throws FormatError on unknown, duplicate or missing rows.
BaseState read_base_solution(const Network& net, std::string_view text);

struct ContingencySolution {
    std::string label;
    double delta = 0.0;
    OperatingPoint point;
};

/// One block per entry, in the order given. Generators offline in the
/// contingency are written with zero power.
std::string write_contingency_solutions(const Network& net, const std::vector<ContingencySolution>& blocks);

/// Blocks matched to net.contingencies() by label. With strict set, a missing
/// block is a FormatError; otherwise its slot is empty.
std::vector<std::optional<ContingencySolution>> read_contingency_solutions(const Network& net, std::string_view text,
                                                                           bool strict = true);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so readers never see a partial file.
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace scopf::io
