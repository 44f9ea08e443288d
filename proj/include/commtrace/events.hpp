#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "commtrace/lifecycle.hpp"
#include "commtrace/topics.hpp"

namespace commtrace {

enum class EventKind { shift, shift_merge, topic_change };

std::string_view to_string(EventKind kind);

struct EventRecord {
  EventKind kind = EventKind::shift;
  CommunityRef source;
  CommunityRef target;
  double score = 0.0;
  std::size_t overlap = 0;
  double dissim = 0.0;
  double structural = 0.0;  // ancestor, descendant or 1 - A
  std::vector<std::string> camps;
  bool inter_camp = false;
  /// Shift events only: the source community has no match in the next window.
  std::optional<bool> vanishes_next;
};

struct EventThresholds {
  double shift = 0.5;
  double shift_merge = 0.5;
  double topic_change = 0.3;
  std::size_t min_overlap = 5;
};

// Scalar forms: both factors must lie in [0, 1].
double shift_score(double dissim, double ancestor);
double shift_merge_score(double dissim, double descendant);
double topic_change_score(double dissim, double entropy);

// Member/centroid forms.
double shift_score(const MemberSet& previous, const MemberSet& next, const TermVector& previous_centroid,
                   const TermVector& next_centroid);
double shift_merge_score(const MemberSet& previous, const MemberSet& next, const TermVector& previous_centroid,
                         const TermVector& next_centroid);

// Lineage-aware forms. Shift and shift/merge reject matched pairs (same
// line); topic change requires `source` to have a match.
double shift_score(const WindowSeries& series, CommunityRef source, int target);
double shift_merge_score(const WindowSeries& series, CommunityRef source, int target);
double topic_change_score(const WindowSeries& series, CommunityRef source);

/// Scores every consecutive-window pair and keeps those at or above the
/// thresholds with at least `min_overlap` shared authors. Sorted by
/// (source window, kind, descending score, source, target).
std::vector<EventRecord> detect_events(const WindowSeries& series, const EventThresholds& thresholds = {});

/// camp label -> stemmed keywords
struct CampConfig {
  std::map<std::string, std::vector<std::string>> camps;

  /// SW: semant, ontolog, rdf; IR: ir, retriev.
  static CampConfig defaults();
  void validate() const;
};

/// Every camp with a keyword among `characterising`. Sorted labels.
std::vector<std::string> classify_camps(const std::vector<std::string>& characterising, const CampConfig& config);

/// Sets camps to the union of both endpoints' labels; inter-camp when that
/// union holds at least two camps.
EventRecord flag_inter_camp(EventRecord event, const std::vector<std::string>& source_camps,
                            const std::vector<std::string>& target_camps);

/// Classifies both endpoints of every event via their characterising keywords.
void label_events(std::vector<EventRecord>& events, const WindowSeries& series, const Vocabulary& vocabulary,
                  const CampConfig& config, std::size_t top_k = 20);

void write_events(std::ostream& out, const std::vector<EventRecord>& events);

}  // namespace commtrace
