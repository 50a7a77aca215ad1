#pragma once

#include <string>
#include <vector>

#include "semisup/types.hpp"

namespace semisup {

// Frame-ordered predicted labels with segment boundaries (one segment per
// video). Smoothing never crosses a segment boundary.
struct LabelSequence {
  std::vector<int> labels;
  std::vector<int> segments;  // same length; contiguous runs of equal ids
  int class_count = 0;

  std::size_t size() const { return labels.size(); }
};

LabelSequence make_sequence(std::vector<int> labels, std::vector<int> segments,
                            int class_count = 0);
LabelSequence make_sequence(std::vector<int> labels, int class_count = 0);

// Tumbling-window majority vote: each segment is partitioned into
// consecutive blocks of `window` frames (the final block may be shorter) and
// every frame in a block takes the block's modal label. Ties break toward
// the smallest class index.
LabelSequence smooth(const LabelSequence& seq, int window);

// Single-segment convenience used by tests and diagnostics.
std::vector<int> smooth_labels(const std::vector<int>& labels, int window, int classes);

// CSV columns: segment_id, frame_index, label.
void save_labels_csv(const LabelSequence& seq, const std::string& path);
LabelSequence load_labels_csv(const std::string& path);

}  // namespace semisup
