#include "cage/core.hpp"

#include <cctype>
#include <cmath>

namespace cage {

const char* to_string(UnitLevel level) {
    return level == UnitLevel::Token ? "token" : "sentence";
}

UnitLevel unit_level_from_string(const std::string& s) {
    if (s == "token") return UnitLevel::Token;
    if (s == "sentence") return UnitLevel::Sentence;
    throw std::invalid_argument("unknown unit level: " + s);
}

const char* to_string(NormalizationMode mode) {
    switch (mode) {
        case NormalizationMode::RowStochastic: return "sum1";
        case NormalizationMode::NonNegativeOnly: return "clamp";
        case NormalizationMode::RawPassthrough: return "none";
    }
    return "sum1";
}

NormalizationMode normalization_mode_from_string(const std::string& s) {
    if (s == "sum1") return NormalizationMode::RowStochastic;
    if (s == "clamp") return NormalizationMode::NonNegativeOnly;
    if (s == "none") return NormalizationMode::RawPassthrough;
    throw std::invalid_argument("unknown normalization mode: " + s);
}

std::vector<std::string> Example::unit_texts() const {
    std::vector<std::string> texts;
    texts.reserve(prompt_units.size() + generated_units.size());
    for (const auto& u : prompt_units) texts.push_back(u.text);
    for (const auto& u : generated_units) texts.push_back(u.text);
    return texts;
}

void Example::validate() const {
    if (prompt_units.empty()) throw std::invalid_argument("example: empty prompt");
    if (generated_units.empty()) throw std::invalid_argument("example: empty generation");
    if (output_indices.empty()) throw std::invalid_argument("example: empty output set");
    for (int idx : output_indices) {
        if (idx < 0 || idx >= generation_len())
            throw std::invalid_argument("example: output index out of range: " + std::to_string(idx));
    }
    if (gt_indices) {
        for (int idx : *gt_indices) {
            if (idx < 0 || idx >= prompt_len())
                throw std::invalid_argument("example: gt index out of range: " + std::to_string(idx));
        }
    }
    auto check_spans = [](const std::vector<UnitSpan>& spans, const char* what) {
        int prev_end = 0;
        bool first = true;
        for (const auto& s : spans) {
            if (s.start >= s.end) throw std::invalid_argument(std::string("example: empty span in ") + what);
            if (!first && s.start < prev_end)
                throw std::invalid_argument(std::string("example: overlapping spans in ") + what);
            prev_end = s.end;
            first = false;
        }
    };
    check_spans(prompt_units, "prompt");
    check_spans(generated_units, "generation");
}

Example make_example(std::vector<std::string> prompt_units,
                     std::vector<std::string> generated_units,
                     std::set<int> output_indices,
                     std::optional<std::set<int>> gt_indices,
                     UnitLevel level) {
    Example ex;
    ex.unit_level = level;
    int pos = 0;
    for (auto& t : prompt_units) ex.prompt_units.push_back({pos, pos + 1, std::move(t)}), ++pos;
    pos = 0;
    for (auto& t : generated_units) ex.generated_units.push_back({pos, pos + 1, std::move(t)}), ++pos;
    ex.output_indices = std::move(output_indices);
    ex.gt_indices = std::move(gt_indices);
    ex.validate();
    return ex;
}

CausalityError::CausalityError(int row, int col, double value)
    : std::runtime_error("causality violation at row " + std::to_string(row) + ", col " +
                         std::to_string(col) + " (value " + std::to_string(value) + ")"),
      row(row),
      col(col),
      value(value) {}

void AttributionTable::validate_causality() const {
    for (int i = 0; i < values.rows(); ++i) {
        for (int j = prompt_len + i; j < values.cols(); ++j) {
            if (values(i, j) != 0.0) throw CausalityError(i, j, values(i, j));
        }
    }
}

void AttributionTable::validate() const {
    if (prompt_len < 1) throw std::invalid_argument("table: prompt_len must be >= 1");
    if (total_len <= prompt_len) throw std::invalid_argument("table: total_len must exceed prompt_len");
    if (values.rows() != generation_len() || values.cols() != total_len)
        throw std::invalid_argument("table: value shape does not match prompt_len/total_len");
    for (double v : values.data()) {
        if (!std::isfinite(v)) throw std::invalid_argument("table: non-finite value");
    }
    validate_causality();
}

namespace {

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_terminal(char c) { return c == '.' || c == '?' || c == '!'; }

// Emits the trimmed span for raw [begin, end), skipping all-whitespace pieces.
void emit_span(const std::string& text, int begin, int end, std::vector<UnitSpan>& out) {
    while (begin < end && is_ws(text[begin])) ++begin;
    while (end > begin && is_ws(text[end - 1])) --end;
    if (begin >= end) return;
    out.push_back({begin, end, text.substr(begin, end - begin)});
}

}  // namespace

std::vector<UnitSpan> segment_text(const std::string& text) {
    std::vector<UnitSpan> spans;
    const int n = static_cast<int>(text.size());
    int line_start = 0;
    for (int line_end = 0; line_end <= n; ++line_end) {
        if (line_end < n && text[line_end] != '\n') continue;
        int seg_start = line_start;
        for (int i = line_start; i < line_end; ++i) {
            if (is_terminal(text[i]) && i + 1 < line_end && is_ws(text[i + 1])) {
                emit_span(text, seg_start, i + 1, spans);
                seg_start = i + 1;
            }
        }
        emit_span(text, seg_start, line_end, spans);
        line_start = line_end + 1;
    }
    if (spans.empty()) throw std::invalid_argument("no units");
    return spans;
}

namespace {

// Validates that spans tile [0, expected_len) exactly.
void check_segmentation(const std::vector<UnitSpan>& seg, int expected_len, const char* what) {
    int pos = 0;
    for (const auto& s : seg) {
        if (s.start != pos || s.end <= s.start)
            throw std::invalid_argument(std::string("aggregate: non-contiguous ") + what + " segmentation");
        pos = s.end;
    }
    if (pos != expected_len)
        throw std::invalid_argument(std::string("aggregate: ") + what +
                                    " segmentation does not cover the table (" + std::to_string(pos) +
                                    " vs " + std::to_string(expected_len) + " tokens)");
}

}  // namespace

AttributionTable aggregate_to_sentences(const AttributionTable& table,
                                        const std::vector<UnitSpan>& prompt_seg,
                                        const std::vector<UnitSpan>& gen_seg) {
    if (table.unit_level != UnitLevel::Token)
        throw std::invalid_argument("aggregate: table is not token-level");
    if (prompt_seg.empty() || gen_seg.empty())
        throw std::invalid_argument("aggregate: empty segmentation");

    const int p_tok = table.prompt_len;
    const int y_tok = table.generation_len();
    check_segmentation(prompt_seg, p_tok, "prompt");
    check_segmentation(gen_seg, y_tok, "generation");

    const int p_sent = static_cast<int>(prompt_seg.size());
    const int y_sent = static_cast<int>(gen_seg.size());
    const int t_sent = p_sent + y_sent;

    AttributionTable out;
    out.prompt_len = p_sent;
    out.total_len = t_sent;
    out.unit_level = UnitLevel::Sentence;
    out.method_tag = table.method_tag;
    out.values = Matrix(y_sent, t_sent);

    // Column ranges per sentence unit, in global token coordinates.
    auto col_range = [&](int unit) -> std::pair<int, int> {
        if (unit < p_sent) return {prompt_seg[unit].start, prompt_seg[unit].end};
        const auto& g = gen_seg[unit - p_sent];
        return {p_tok + g.start, p_tok + g.end};
    };

    for (int i = 0; i < y_sent; ++i) {
        const int row_begin = gen_seg[i].start;
        const int row_end = gen_seg[i].end;
        // Strictly earlier units only; the row's own sentence and anything
        // later stay exact zero so sentence-level causality holds.
        for (int j = 0; j < p_sent + i; ++j) {
            auto [c_begin, c_end] = col_range(j);
            double sum = 0.0;
            long count = 0;
            for (int r = row_begin; r < row_end; ++r) {
                const int diag = p_tok + r;  // first undefined column for token row r
                for (int c = c_begin; c < c_end && c < diag; ++c) {
                    sum += table.values(r, c);
                    ++count;
                }
            }
            out.values(i, j) = count > 0 ? sum / static_cast<double>(count) : 0.0;
        }
    }
    return out;
}

}  // namespace cage
