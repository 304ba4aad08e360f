#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace trajkit {

constexpr int kMinCourse = 2;
constexpr int kMaxCourse = 8;
constexpr std::size_t kNumScores = 6;

/// One child's six task scores for one course (academic year).
/// Scores are normalized to [0, 100].
struct SessionRecord {
    std::string child_id;
    int course = 0;
    std::array<double, kNumScores> q_scores{};

    bool operator==(const SessionRecord&) const = default;
};

/// All records for one course, in input order, one per child.
struct Cohort {
    int course = 0;
    std::vector<SessionRecord> records;

    std::size_t size() const { return records.size(); }
};

/// Children present in two consecutive courses, paired up.
struct AlignedPair {
    struct Entry {
        std::string child_id;
        std::size_t index_from = 0; // row in the earlier cohort
        std::size_t index_to = 0;   // row in the later cohort
        SessionRecord record_from;
        SessionRecord record_to;
    };

    int course_from = 0;
    int course_to = 0;
    std::vector<Entry> children;
};

/// CSV ingestion failure. `line` is 1-based and counts the header.
class ParseError : public std::runtime_error {
public:
    enum class Kind {
        MissingHeader,
        MalformedRow,
        ScoreOutOfRange,
        CourseOutOfRange,
        DuplicateSession,
    };

    ParseError(Kind kind, std::string message, std::size_t line = 0, std::size_t column = 0)
        : std::runtime_error(std::move(message)), kind(kind), line(line), column(column) {}

    Kind kind;
    std::size_t line;
    std::size_t column;
};

inline const char* kSessionCsvHeader = "child_id,course,q1,q2,q3,q4,q5,q6";

/// Parses the score table. The header line must match kSessionCsvHeader
/// exactly (after stripping a trailing CR); fields are whitespace-trimmed;
/// a (child, course) pair may appear at most once.
std::vector<SessionRecord> parse_csv(const std::string& path);

/// Same parser over an already-loaded buffer (used by parse_csv and the
/// round-trip tests).
std::vector<SessionRecord> parse_csv_text(const std::string& text);

/// Serializes records in the exact ingestion format.
std::string to_csv(const std::vector<SessionRecord>& records);

/// Groups validated records into per-course cohorts. Courses with no
/// records are absent from the map.
std::map<int, Cohort> build_cohorts(const std::vector<SessionRecord>& records);

/// One pair for each (c, c+1) where both cohorts exist. Children are the
/// intersection of the two cohorts' ids, ordered by appearance in the
/// earlier cohort.
std::vector<AlignedPair> align_consecutive(const std::map<int, Cohort>& cohorts);

} // namespace trajkit
