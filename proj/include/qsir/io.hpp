#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qsir/dataset.hpp"
#include "qsir/forecaster.hpp"
#include "qsir/quantizer.hpp"
#include "qsir/simulation.hpp"
#include "qsir/sir.hpp"

namespace qsir::io {

/// Shortest round-trip-safe text form: 17 significant digits.
std::string format_double(double value);

/// Numeric CSV: header row, then rows of numbers. Lines starting with '#'
/// are collected as comments and skipped.
struct CsvTable {
    std::vector<std::string> header;
    Matrix values;
    std::vector<std::string> comments;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Parses "k1=v1,k2=v2" (leading '#' and spaces ignored).
std::map<std::string, std::string> parse_metadata(const std::string& line);

/// Last column is the response; all other columns are covariates.
DataSet dataset_from_table(const CsvTable& table);
void write_dataset(std::ostream& out, const DataSet& data);

void write_codebook(std::ostream& out, const Codebook& codebook);
Codebook read_codebook(std::istream& in);

void write_estimates(std::ostream& out, std::span<const SirEstimate> estimates);
/// Direction stored in the first row of an estimate file.
std::vector<double> read_estimate_direction(std::istream& in);

void write_transition(std::ostream& out, const TransitionModel& model);
TransitionModel read_transition(std::istream& in);

void write_report(std::ostream& out, const ExperimentReport& report);
void write_summary(std::ostream& out, std::span<const SummaryRow> summary);

/// Parses a comma- or whitespace-separated list of numbers.
std::vector<double> parse_vector(const std::string& text);

} // namespace qsir::io
