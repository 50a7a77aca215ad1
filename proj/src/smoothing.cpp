#include "semisup/smoothing.hpp"

#include <algorithm>
#include <sstream>

#include "semisup/io.hpp"

namespace semisup {

namespace {

int infer_classes(const std::vector<int>& labels) {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  return k;
}

}  // namespace

LabelSequence make_sequence(std::vector<int> labels, std::vector<int> segments,
                            int class_count) {
  require_valid(labels.size() == segments.size(),
                "label sequence: labels/segments length mismatch");
  if (class_count == 0) class_count = infer_classes(labels);
  for (int l : labels)
    require_valid(l >= 0 && l < class_count, "label sequence: label out of range");
  LabelSequence s;
  s.labels = std::move(labels);
  s.segments = std::move(segments);
  s.class_count = class_count;
  return s;
}

LabelSequence make_sequence(std::vector<int> labels, int class_count) {
  std::vector<int> segments(labels.size(), 0);
  return make_sequence(std::move(labels), std::move(segments), class_count);
}

namespace {

// Majority vote over labels[start, stop); ties go to the smallest label.
int block_mode(const std::vector<int>& labels, std::size_t start, std::size_t stop,
               std::vector<int>& hist) {
  std::fill(hist.begin(), hist.end(), 0);
  for (std::size_t i = start; i < stop; ++i) hist[labels[i]] += 1;
  int mode = 0;
  for (std::size_t c = 1; c < hist.size(); ++c)
    if (hist[c] > hist[mode]) mode = static_cast<int>(c);
  return mode;
}

}  // namespace

LabelSequence smooth(const LabelSequence& seq, int window) {
  require_valid(window >= 1, "smooth: window must be >= 1");
  LabelSequence out = seq;
  std::vector<int> hist(std::max(seq.class_count, 1), 0);
  std::size_t seg_start = 0;
  while (seg_start < seq.size()) {
    std::size_t seg_stop = seg_start;
    while (seg_stop < seq.size() && seq.segments[seg_stop] == seq.segments[seg_start])
      ++seg_stop;
    for (std::size_t start = seg_start; start < seg_stop; start += window) {
      const std::size_t stop = std::min(seg_stop, start + static_cast<std::size_t>(window));
      const int mode = block_mode(seq.labels, start, stop, hist);
      std::fill(out.labels.begin() + start, out.labels.begin() + stop, mode);
    }
    seg_start = seg_stop;
  }
  return out;
}

std::vector<int> smooth_labels(const std::vector<int>& labels, int window, int classes) {
  return smooth(make_sequence(labels, classes), window).labels;
}

void save_labels_csv(const LabelSequence& seq, const std::string& path) {
  std::ostringstream out;
  out << "segment_id,frame_index,label\n";
  int frame = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i > 0 && seq.segments[i] != seq.segments[i - 1]) frame = 0;
    out << seq.segments[i] << ',' << frame << ',' << seq.labels[i] << '\n';
    ++frame;
  }
  write_text_file(path, out.str());
}

LabelSequence load_labels_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) !=
                                     std::vector<std::string>{"segment_id", "frame_index", "label"})
    throw IoError("label CSV must start with 'segment_id,frame_index,label': " + path);
  std::vector<int> labels, segments;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw IoError("label CSV row has wrong arity: " + path);
    segments.push_back(static_cast<int>(parse_int(fields[0])));
    labels.push_back(static_cast<int>(parse_int(fields[2])));
  }
  return make_sequence(std::move(labels), std::move(segments));
}

}  // namespace semisup
