#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gsdcheck/gsd.hpp"

namespace gsdcheck {

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field when it contains a comma, quote or whitespace edge.
std::string csv_escape(std::string_view field);

struct ScoreRecord {
    std::string experiment_id;
    std::string stimulus_id;
    std::optional<std::string> subject_id;
    int score = 0;

    friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

/// Header names for each field. An empty subject name means "no subject column".
struct ColumnMap {
    std::string experiment = "experiment";
    std::string stimulus = "stimulus_id";
    std::string subject = "subject_id";
    std::string score = "score";

    /// Parses "field=header,..." with field in {experiment, stimulus, subject, score}.
    static ColumnMap parse(std::string_view spec);
};

struct RowError {
    std::size_t line = 0;  // 1-based, header is line 1
    std::string message;
};

struct ParseResult {
    std::vector<ScoreRecord> records;
    std::vector<RowError> errors;
};

/// Fatal input problems: unreadable/empty file, missing columns, or the
/// first bad row in strict mode.
class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Streams a tidy score CSV. In lenient mode malformed rows are collected
/// into ParseResult::errors; in strict mode the first one throws CsvError.
ParseResult parse_csv(std::istream& in, const ColumnMap& columns = {}, bool strict = false);
ParseResult parse_csv(const std::filesystem::path& path, const ColumnMap& columns = {}, bool strict = false);

/// Writes records with the default column names (subject column included).
void write_tidy_csv(std::ostream& os, const std::vector<ScoreRecord>& records);

struct ExperimentData {
    std::string experiment_id;
    std::map<std::string, ScoreCounts> stimuli;
    std::size_t total_scores = 0;

    std::size_t stimulus_count() const noexcept { return stimuli.size(); }
};

struct AggregateResult {
    std::map<std::string, ExperimentData> experiments;
    std::vector<std::string> warnings;
};

/// Per-stimulus score histograms grouped by experiment. Warns for stimuli
/// with n < 9 or n > 33 and for repeated (subject, stimulus) rows, which are
/// still counted.
AggregateResult aggregate(const std::vector<ScoreRecord>& records);

/// Counts CSV: experiment_id,stimulus_id,n,k1,k2,k3,k4,k5
void write_counts_csv(std::ostream& os, const std::vector<ExperimentData>& experiments);
std::map<std::string, ExperimentData> read_counts_csv(std::istream& in);
std::map<std::string, ExperimentData> read_counts_csv(const std::filesystem::path& path);

}  // namespace gsdcheck
