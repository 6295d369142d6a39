#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "modlab/fields.hpp"
#include "modlab/freqdecomp.hpp"

namespace modlab {

struct SeminormId {
  enum class Tag { Sm, Max, Str, Sm2, Max2d, Ant, Str2, Gstr, Sm1, Max1, Ant1, Str1, Gstr1 };
  Tag tag = Tag::Sm;
  int m = 2;  // only read by sm, max and str

  static SeminormId parse(const std::string& text);  // "sm", "sm:4", "gstr1", ...
  std::string name() const;
  // Dimension the id is defined for; 0 means any dimension >= 2.
  int required_dim() const;
};

// How an intersection of norms combines its members.
enum class CapRule { Max, Sum };

double composite_seminorm(const SpaceTimeField& u, const SeminormId& id, const Partition& P,
                          CapRule rule = CapRule::Max);
// Norm of the intersection of several ids (e.g. sm2 cap max cap ant).
double composite_seminorm(const SpaceTimeField& u, const std::vector<SeminormId>& ids, const Partition& P,
                          CapRule rule = CapRule::Max);

struct SeminormTrace {
  std::vector<std::string> names;
  std::vector<double> window_end;            // t_j, j = 1 .. J
  std::vector<std::vector<double>> values;   // values[row][id]
};

// Values over the expanding windows [t_0, t_j], j = 1 .. J (slices 0 .. j-1).
SeminormTrace seminorm_trace(const SpaceTimeField& u, const std::vector<SeminormId>& ids, const Partition& P,
                             CapRule rule = CapRule::Max);

// CSV with header "t_end,<id>,<id>,...".
void write_trace_csv(std::ostream& os, const SeminormTrace& trace);

}  // namespace modlab
