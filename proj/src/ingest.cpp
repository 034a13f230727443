#include "gsdcheck/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>

namespace gsdcheck {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<long long> parse_integer(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? std::string::npos : static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_escape(std::string_view field) {
    const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos ||
                              (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

ColumnMap ColumnMap::parse(std::string_view spec) {
    ColumnMap map;
    for (const std::string& item : split_csv_line(spec)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("column mapping '" + item + "' is not field=header");
        const std::string key(trim(std::string_view(item).substr(0, eq)));
        const std::string value(trim(std::string_view(item).substr(eq + 1)));
        if (key == "experiment") map.experiment = value;
        else if (key == "stimulus") map.stimulus = value;
        else if (key == "subject") map.subject = value;
        else if (key == "score") map.score = value;
        else throw std::invalid_argument("unknown column mapping field '" + key + "'");
    }
    return map;
}

ParseResult parse_csv(std::istream& in, const ColumnMap& columns, bool strict) {
    std::string line;
    std::size_t line_no = 0;
    // Skip leading blank lines; the first non-blank line is the header.
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw CsvError("CSV input is empty");
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = std::string(trim(h));
    const std::size_t exp_col = find_column(header, columns.experiment);
    const std::size_t stim_col = find_column(header, columns.stimulus);
    const std::size_t score_col = find_column(header, columns.score);
    const std::size_t subj_col = columns.subject.empty() ? std::string::npos : find_column(header, columns.subject);
    std::string missing;
    if (exp_col == std::string::npos) missing += " " + columns.experiment;
    if (stim_col == std::string::npos) missing += " " + columns.stimulus;
    if (score_col == std::string::npos) missing += " " + columns.score;
    if (!missing.empty()) throw CsvError("CSV header is missing required column(s):" + missing);

    ParseResult result;
    auto fail = [&](std::string message) {
        if (strict) throw CsvError("line " + std::to_string(line_no) + ": " + message);
        result.errors.push_back({line_no, std::move(message)});
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        const std::size_t needed = std::max({exp_col, stim_col, score_col,
                                             subj_col == std::string::npos ? 0 : subj_col}) + 1;
        if (fields.size() < needed) {
            fail("expected at least " + std::to_string(needed) + " fields, got " + std::to_string(fields.size()));
            continue;
        }
        ScoreRecord rec;
        rec.experiment_id = std::string(trim(fields[exp_col]));
        rec.stimulus_id = std::string(trim(fields[stim_col]));
        if (subj_col != std::string::npos) {
            const auto subject = trim(fields[subj_col]);
            if (!subject.empty()) rec.subject_id = std::string(subject);
        }
        if (rec.experiment_id.empty() || rec.stimulus_id.empty()) {
            fail("empty experiment or stimulus id");
            continue;
        }
        const auto score = parse_integer(fields[score_col]);
        if (!score) {
            fail("score '" + fields[score_col] + "' is not an integer");
            continue;
        }
        if (*score < 1 || *score > 5) {
            fail("score " + std::to_string(*score) + " outside 1..5");
            continue;
        }
        rec.score = static_cast<int>(*score);
        result.records.push_back(std::move(rec));
    }
    if (result.records.empty() && result.errors.empty()) throw CsvError("CSV input has a header but no rows");
    return result;
}

ParseResult parse_csv(const std::filesystem::path& path, const ColumnMap& columns, bool strict) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open " + path.string());
    return parse_csv(in, columns, strict);
}

void write_tidy_csv(std::ostream& os, const std::vector<ScoreRecord>& records) {
    const ColumnMap names;
    os << names.experiment << ',' << names.stimulus << ',' << names.subject << ',' << names.score << '\n';
    for (const ScoreRecord& r : records) {
        os << csv_escape(r.experiment_id) << ',' << csv_escape(r.stimulus_id) << ','
           << csv_escape(r.subject_id.value_or("")) << ',' << r.score << '\n';
    }
}

AggregateResult aggregate(const std::vector<ScoreRecord>& records) {
    AggregateResult out;
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    std::set<std::tuple<std::string, std::string, std::string>> reported;
    for (const ScoreRecord& r : records) {
        ExperimentData& exp = out.experiments[r.experiment_id];
        exp.experiment_id = r.experiment_id;
        ++exp.stimuli[r.stimulus_id].k[r.score - 1];
        ++exp.total_scores;
        if (r.subject_id) {
            auto key = std::make_tuple(r.experiment_id, r.stimulus_id, *r.subject_id);
            if (!seen.insert(key).second && reported.insert(key).second) {
                out.warnings.push_back("duplicate rows for subject '" + *r.subject_id + "' on stimulus '" +
                                       r.stimulus_id + "' in experiment '" + r.experiment_id +
                                       "' (all rows counted)");
            }
        }
    }
    for (const auto& [exp_id, exp] : out.experiments) {
        for (const auto& [stim_id, counts] : exp.stimuli) {
            const int n = counts.n();
            if (n < 9 || n > 33) {
                out.warnings.push_back("stimulus '" + stim_id + "' in experiment '" + exp_id + "' has " +
                                       std::to_string(n) + " scores (outside 9..33)");
            }
        }
    }
    return out;
}

void write_counts_csv(std::ostream& os, const std::vector<ExperimentData>& experiments) {
    os << "experiment_id,stimulus_id,n,k1,k2,k3,k4,k5\n";
    for (const ExperimentData& exp : experiments) {
        for (const auto& [stim_id, counts] : exp.stimuli) {
            os << csv_escape(exp.experiment_id) << ',' << csv_escape(stim_id) << ',' << counts.n();
            for (int k : counts.k) os << ',' << k;
            os << '\n';
        }
    }
}

std::map<std::string, ExperimentData> read_counts_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw CsvError("counts CSV is empty");
    auto header = split_csv_line(line);
    const std::vector<std::string> expected = {"experiment_id", "stimulus_id", "n", "k1", "k2", "k3", "k4", "k5"};
    if (header != expected) throw CsvError("counts CSV: unexpected header '" + line + "'");

    std::map<std::string, ExperimentData> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != expected.size()) {
            throw CsvError("counts CSV line " + std::to_string(line_no) + ": expected 8 fields");
        }
        ScoreCounts counts;
        for (int j = 0; j < kCategories; ++j) {
            const auto v = parse_integer(fields[3 + j]);
            if (!v || *v < 0) throw CsvError("counts CSV line " + std::to_string(line_no) + ": bad count");
            counts.k[j] = static_cast<int>(*v);
        }
        const auto n = parse_integer(fields[2]);
        if (!n || *n != counts.n()) {
            throw CsvError("counts CSV line " + std::to_string(line_no) + ": n does not match k1..k5");
        }
        ExperimentData& exp = out[fields[0]];
        exp.experiment_id = fields[0];
        if (!exp.stimuli.emplace(fields[1], counts).second) {
            throw CsvError("counts CSV line " + std::to_string(line_no) + ": duplicate stimulus '" + fields[1] + "'");
        }
        exp.total_scores += static_cast<std::size_t>(counts.n());
    }
    if (out.empty()) throw CsvError("counts CSV has no rows");
    return out;
}

std::map<std::string, ExperimentData> read_counts_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open " + path.string());
    return read_counts_csv(in);
}

}  // namespace gsdcheck
