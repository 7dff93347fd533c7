#ifndef CELLFREE_EXCHANGE_HPP
#define CELLFREE_EXCHANGE_HPP

#include <armadillo>
#include <cstdint>
#include <map>

#include "cellfree/objective.hpp"

namespace cellfree {

// Monodirectional ring: BS b receives from its successor (b+1) mod B and
// sends to its predecessor (b-1) mod B. Indices are 0-based.
struct RingRoute {
  arma::uword send_to;
  arma::uword recv_from;
};
RingRoute ring_route(arma::uword b, arma::uword B);

// One ring hop's payload: accumulated (hatted) cross-term tables plus the
// sender's current phase vector. Complex scalar count is 2K^2 + RN.
struct ExchangeMessage {
  arma::uword sender = 0;
  arma::uword block = 0;  // 1-based block index l
  CrossTermTable hat;
  arma::cx_vec theta;

  std::uint64_t scalar_count() const {
    return 2ull * hat.K() * hat.K() + theta.n_elem;
  }
};

// Per-BS snapshots of (theta^s, W^s) keyed by block number, depth B. Block 0
// holds the initialization values.
class HistoryBuffer {
 public:
  explicit HistoryBuffer(arma::uword depth) : depth_(depth) {}

  void push(arma::uword block, arma::cx_vec theta, arma::cx_mat W);
  bool has(arma::uword block) const { return snaps_.count(block) > 0; }
  const arma::cx_vec& theta_at(arma::uword block) const;
  const arma::cx_mat& w_at(arma::uword block) const;

 private:
  struct Snap {
    arma::cx_vec theta;
    arma::cx_mat W;
  };
  const Snap& at(arma::uword block) const;
  arma::uword depth_;
  std::map<arma::uword, Snap> snaps_;
};

// BS b's own contribution to the cross-term tables for a given (theta, W):
// varpi(k,j) = h_{b,k}^H w_j, vartheta(k,j) = theta^H V_k^H G_b w_j.
CrossTermTable local_cross_contribution(const ChannelSet& ch, arma::uword b,
                                        const arma::cx_mat& W_b,
                                        const arma::cx_vec& theta_b);

// Ini-Block I-layer: zeroed outgoing tables and a local-only used table
// built from the initialization values.
struct InitCrossTerms {
  CrossTermTable used;
  CrossTermTable outgoing;
};
InitCrossTerms init_cross_terms(const ChannelSet& ch, arma::uword b,
                                const arma::cx_mat& W0,
                                const arma::cx_vec& theta0);

struct ExchangeUpdate {
  CrossTermTable outgoing;  // hatted tables to send this block
  CrossTermTable used;      // tables consumed by the next block
};

// The two halves of every exchange layer. Outgoing tables are formed before
// the ring round (they extend what was received in the previous round), used
// tables after it (they extend what was received this round).
CrossTermTable outgoing_accumulate(const CrossTermTable& received_prev,
                                   const CrossTermTable& own_now);
CrossTermTable outgoing_replace(const CrossTermTable& received_prev,
                                const CrossTermTable& own_obsolete,
                                const CrossTermTable& own_now);
CrossTermTable used_accumulate(const CrossTermTable& received_now,
                               const CrossTermTable& own_now);
CrossTermTable used_replace(const CrossTermTable& received_now,
                            const CrossTermTable& own_obsolete,
                            const CrossTermTable& own_now);

// Blocks 1..B-1: outgoing accumulates onto the previously received tables,
// used accumulates onto the tables received this block.
ExchangeUpdate i1_update(const CrossTermTable& received_now,
                         const CrossTermTable& received_prev,
                         const CrossTermTable& own_now);

// Block B: outgoing as in I1; used removes the own block-1 contribution that
// has travelled around the ring and inserts the fresh one.
ExchangeUpdate i2_update(const CrossTermTable& received_now,
                         const CrossTermTable& received_prev,
                         const CrossTermTable& own_block1,
                         const CrossTermTable& own_now);

// Blocks B+1..L-1: both tables replace the obsolete own contribution (the one
// riding in the corresponding received table) with the fresh one. The
// outgoing side drops the block l-B contribution, the used side block l-B+1.
ExchangeUpdate i3_update(const CrossTermTable& received_now,
                         const CrossTermTable& received_prev,
                         const CrossTermTable& own_out_obsolete,
                         const CrossTermTable& own_used_obsolete,
                         const CrossTermTable& own_now);

// Total complex scalars exchanged in a full run: B (L-1) (2K^2 + RN).
// For B = 1 the simulator short-circuits and sends nothing; this returns the
// formula value for the degenerate self-ring regardless.
std::uint64_t count_overhead(arma::uword B, arma::uword L, arma::uword K,
                             arma::uword R, arma::uword N);

}  // namespace cellfree

#endif  // CELLFREE_EXCHANGE_HPP
