#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "atb/model.hpp"

namespace atb {

/// Parses a BAYES network in UAI text format. Errors carry the line number.
BayesianNetwork parse_network(std::string_view text);

/// Parses "m  v1 x1 ... vm xm". Values are not range-checked.
Evidence parse_evidence(std::string_view text);
/// Same, validating variables and values against `bn`.
Evidence parse_evidence(std::string_view text, const BayesianNetwork& bn);

std::string write_network(const BayesianNetwork& bn);
std::string write_evidence(const Evidence& e);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace atb
