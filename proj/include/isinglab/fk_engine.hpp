#pragma once

#include "isinglab/fk.hpp"
#include "isinglab/lattice.hpp"

#include <cstdint>
#include <vector>

namespace isinglab {

// Exact conditional probabilities and connectivity-event probabilities for
// the FK measure on a lattice, by summation over all completions of the
// unfixed edges. The sum runs as a transfer pass over a row-banded edge
// order, with states = (open-path partition of the active sites, per-class
// wiring/mark flags), so graphs far beyond brute enumeration stay exact as
// long as the lattice is narrow. Supports at most two wiring classes and an
// optional conditioning on the absence of an open path between them (the
// event A^xi).
class FkTransferEngine {
  public:
    struct Options {
        WiringPartition wiring;      // up to two classes; index 0 = P, 1 = M
        bool condition_no_pm_path = false;
        std::vector<int> mark_a_sites; // event marks (open-path semantics)
        std::vector<int> mark_b_sites;
        double p = 0.5;
        double q = 2.0;
    };

    FkTransferEngine(const Lattice& lat, Options opt);

    static constexpr std::uint8_t edge_closed = 0;
    static constexpr std::uint8_t edge_open = 1;
    static constexpr std::uint8_t edge_free = 2;

    // P(omega(query)=1 | fixed edges, [no P-M path]); fixed has one entry per
    // edge. The query edge must be free.
    double conditional_open(const std::vector<std::uint8_t>& fixed, int query_edge);

    // P(no open path joins a mark-A site to a mark-B site | fixed, [no P-M
    // path]).
    double event_probability(const std::vector<std::uint8_t>& fixed);

    // Diagnostics.
    std::size_t peak_states() const { return peak_states_; }
    int frontier_width() const { return max_slots_used_; }

  private:
    struct Pair {
        double tot = 0.0;
        double sel = 0.0;
    };

    double run(const std::vector<std::uint8_t>& fixed, int query_edge, bool event_mode);

    const Lattice* lat_;
    Options opt_;
    std::vector<int> order_;      // edge ids in processing order
    std::vector<int> slot_of_;    // per site
    std::vector<int> first_pos_, last_pos_;
    std::vector<std::vector<int>> retire_at_; // per position: sites to retire
    std::vector<std::uint8_t> site_init_flags_;
    int max_slots_used_ = 0;
    std::size_t peak_states_ = 0;
    bool has_m_class_ = false;
};

// Exact probability under the FK measure (wiring, optional A-conditioning)
// that no open path connects `from_sites` to `to_sites`.
double fk_disconnection_probability(const Lattice& lat, const WiringPartition& wiring, double p,
                                    double q, const std::vector<int>& from_sites,
                                    const std::vector<int>& to_sites, bool condition_no_pm_path = false);

} // namespace isinglab
