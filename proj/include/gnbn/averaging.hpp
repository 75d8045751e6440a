#pragma once

#include <map>
#include <vector>

#include "gnbn/dag.hpp"

namespace gnbn {

struct ArcStrengthTable {
    std::map<Arc, double> arcs;  // observed arcs only; absent = 0
    int network_count = 0;
};

// Directed-arc frequencies across an ensemble of learned networks.
ArcStrengthTable arc_strengths(const std::vector<Dag>& networks);

// Threshold minimizing the L1 distance between the empirical CDF of arc
// strengths and the ideal step CDF of a cleanly separated ensemble (noise
// arcs at 0, significant arcs at 1, split at the candidate). Returns the
// largest strength of the noise cluster, so the "frequency > threshold"
// rule keeps exactly the significant cluster; ties go to the smaller value.
double estimate_threshold(const ArcStrengthTable& t);

// Arcs with frequency > threshold, added in descending-frequency order and
// skipping cycle or tier violations; isolated SNPs dropped, traits kept.
Dag averaged_network(const ArcStrengthTable& t, double threshold,
                     const std::vector<Node>& nodes);

}  // namespace gnbn
