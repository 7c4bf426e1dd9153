#pragma once

// Core domain types: segmented sequences, attribution tables and the
// token-to-sentence aggregation used to lift token-level scores to
// sentence granularity.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cage {

enum class UnitLevel { Token, Sentence };

const char* to_string(UnitLevel level);
UnitLevel unit_level_from_string(const std::string& s);

/// How raw attribution rows are normalized when building a graph.
/// RowStochastic is the canonical construction; the other two exist for
/// ablation runs and are serialized as "sum1", "clamp" and "none".
enum class NormalizationMode { RowStochastic, NonNegativeOnly, RawPassthrough };

const char* to_string(NormalizationMode mode);
NormalizationMode normalization_mode_from_string(const std::string& s);

/// Dense row-major matrix of doubles. Deliberately minimal: fixed shape,
/// zero-initialized, no views. Desk-scale sizes only.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative shape");
    }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix& other) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// Half-open [start, end) span of unit offsets with the covered text.
/// Offsets are token indices for token-level segmentations and character
/// indices for spans produced by segment_text.
struct UnitSpan {
    int start = 0;
    int end = 0;
    std::string text;

    bool operator==(const UnitSpan&) const = default;
};

/// One prompt/generation pair. Indices are 0-based throughout the API;
/// file formats use 1-based indices and converters live in io.
struct Example {
    std::vector<UnitSpan> prompt_units;
    std::vector<UnitSpan> generated_units;
    std::set<int> output_indices;                ///< generation-unit indices being explained
    std::optional<std::set<int>> gt_indices;     ///< prompt-unit indices, when ground truth exists
    UnitLevel unit_level = UnitLevel::Sentence;

    int prompt_len() const { return static_cast<int>(prompt_units.size()); }
    int generation_len() const { return static_cast<int>(generated_units.size()); }
    int total_len() const { return prompt_len() + generation_len(); }

    /// Prompt texts followed by generated texts, the order backends score in.
    std::vector<std::string> unit_texts() const;

    void validate() const;  // throws std::invalid_argument on any broken invariant
};

/// Convenience constructor from plain unit strings; spans are assigned
/// consecutive offsets within each list.
Example make_example(std::vector<std::string> prompt_units,
                     std::vector<std::string> generated_units,
                     std::set<int> output_indices,
                     std::optional<std::set<int>> gt_indices = std::nullopt,
                     UnitLevel level = UnitLevel::Sentence);

struct CausalityError : std::runtime_error {
    CausalityError(int row, int col, double value);
    int row;     ///< generation-row index (0-based)
    int col;     ///< column index (0-based)
    double value;
};

/// Raw influence scores of every preceding unit on every generated unit.
/// Row i holds the scores for generated unit i (global index prompt_len + i);
/// entries at or beyond each row's own position are exact zero.
struct AttributionTable {
    int prompt_len = 0;
    int total_len = 0;
    UnitLevel unit_level = UnitLevel::Sentence;
    std::string method_tag;
    Matrix values;  // generation_len x total_len

    int generation_len() const { return total_len - prompt_len; }

    void validate() const;            // shape + finiteness + causality
    void validate_causality() const;  // throws CausalityError at the first offending cell
};

/// Score vector over prompt units explaining a chosen output set.
struct ContextAttribution {
    std::vector<double> scores;      // one per prompt unit
    std::set<int> output_indices;    // generation-unit indices (0-based)
    std::string method_tag;
    NormalizationMode mode = NormalizationMode::RowStochastic;
};

/// Splits text into sentence spans: first on newlines, then after terminal
/// punctuation (. ? !) followed by whitespace. Spans are offset-faithful to
/// the input and trimmed of surrounding whitespace.
std::vector<UnitSpan> segment_text(const std::string& text);

/// Collapses a token-level table to sentence level by averaging the block of
/// token-to-token scores for each (generated sentence, unit) pair. The
/// sentence table keeps exact zeros at and above each row's own position, so
/// within-sentence influence is dropped rather than surfacing as self-edges.
///
/// prompt_seg spans index prompt tokens, gen_seg spans index generation
/// tokens (both local to their own stream); together they must tile the
/// token table exactly.
AttributionTable aggregate_to_sentences(const AttributionTable& table,
                                        const std::vector<UnitSpan>& prompt_seg,
                                        const std::vector<UnitSpan>& gen_seg);

}  // namespace cage
