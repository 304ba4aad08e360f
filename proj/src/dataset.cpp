#include "trajkit/dataset.hpp"

#include "trajkit/csv.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace trajkit {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

bool parse_decimal(const std::string& field, double& out) {
    if (field.empty()) return false;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

bool parse_int(const std::string& field, int& out) {
    if (field.empty()) return false;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

} // namespace

std::vector<SessionRecord> parse_csv_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;

    if (!std::getline(in, line) || trim(line) != kSessionCsvHeader) {
        throw ParseError(ParseError::Kind::MissingHeader,
                         std::string("missing or invalid header; expected: ") + kSessionCsvHeader, 1);
    }

    std::vector<SessionRecord> records;
    std::set<std::pair<std::string, int>> seen;
    std::size_t line_no = 1;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;

        const auto fields = split_fields(line);
        if (fields.size() != 2 + kNumScores) {
            throw ParseError(ParseError::Kind::MalformedRow,
                             "line " + std::to_string(line_no) + ": expected 8 fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }

        SessionRecord rec;
        rec.child_id = fields[0];
        if (rec.child_id.empty()) {
            throw ParseError(ParseError::Kind::MalformedRow,
                             "line " + std::to_string(line_no) + ": empty child_id", line_no, 1);
        }

        if (!parse_int(fields[1], rec.course)) {
            throw ParseError(ParseError::Kind::MalformedRow,
                             "line " + std::to_string(line_no) + ": unparseable course '" + fields[1] + "'",
                             line_no, 2);
        }
        if (rec.course < kMinCourse || rec.course > kMaxCourse) {
            throw ParseError(ParseError::Kind::CourseOutOfRange,
                             "line " + std::to_string(line_no) + ": course " + std::to_string(rec.course) +
                                 " outside [" + std::to_string(kMinCourse) + ", " + std::to_string(kMaxCourse) + "]",
                             line_no, 2);
        }

        for (std::size_t q = 0; q < kNumScores; ++q) {
            const std::size_t col = 3 + q;
            double value = 0.0;
            if (!parse_decimal(fields[2 + q], value)) {
                throw ParseError(ParseError::Kind::MalformedRow,
                                 "line " + std::to_string(line_no) + ": unparseable q" + std::to_string(q + 1) +
                                     " '" + fields[2 + q] + "'",
                                 line_no, col);
            }
            if (!(value >= 0.0 && value <= 100.0)) {
                throw ParseError(ParseError::Kind::ScoreOutOfRange,
                                 "line " + std::to_string(line_no) + ": q" + std::to_string(q + 1) + " = " +
                                     fields[2 + q] + " outside [0, 100]",
                                 line_no, col);
            }
            rec.q_scores[q] = value;
        }

        if (!seen.insert({rec.child_id, rec.course}).second) {
            throw ParseError(ParseError::Kind::DuplicateSession,
                             "line " + std::to_string(line_no) + ": duplicate session for child '" + rec.child_id +
                                 "', course " + std::to_string(rec.course),
                             line_no);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<SessionRecord> parse_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::ios_base::failure("cannot open input file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv_text(buffer.str());
}

std::string to_csv(const std::vector<SessionRecord>& records) {
    std::string out = kSessionCsvHeader;
    out += '\n';
    for (const auto& rec : records) {
        out += rec.child_id;
        out += ',';
        out += std::to_string(rec.course);
        for (const double q : rec.q_scores) {
            out += ',';
            out += format_double(q);
        }
        out += '\n';
    }
    return out;
}

std::map<int, Cohort> build_cohorts(const std::vector<SessionRecord>& records) {
    std::map<int, Cohort> cohorts;
    for (const auto& rec : records) {
        auto [it, inserted] = cohorts.try_emplace(rec.course);
        if (inserted) it->second.course = rec.course;
        it->second.records.push_back(rec);
    }
    return cohorts;
}

std::vector<AlignedPair> align_consecutive(const std::map<int, Cohort>& cohorts) {
    std::vector<AlignedPair> pairs;
    for (const auto& [course, cohort] : cohorts) {
        const auto next = cohorts.find(course + 1);
        if (next == cohorts.end()) continue;

        std::unordered_map<std::string, std::size_t> index_to;
        index_to.reserve(next->second.records.size());
        for (std::size_t i = 0; i < next->second.records.size(); ++i) {
            index_to.emplace(next->second.records[i].child_id, i);
        }

        AlignedPair pair;
        pair.course_from = course;
        pair.course_to = course + 1;
        for (std::size_t i = 0; i < cohort.records.size(); ++i) {
            const auto hit = index_to.find(cohort.records[i].child_id);
            if (hit == index_to.end()) continue;
            pair.children.push_back({cohort.records[i].child_id, i, hit->second, cohort.records[i],
                                     next->second.records[hit->second]});
        }
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

} // namespace trajkit
