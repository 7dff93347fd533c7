#include "cellfree/exchange.hpp"

#include <stdexcept>

namespace cellfree {

RingRoute ring_route(arma::uword b, arma::uword B) {
  if (B == 0 || b >= B) throw std::invalid_argument("ring_route: bad index");
  return {(b + B - 1) % B, (b + 1) % B};
}

void HistoryBuffer::push(arma::uword block, arma::cx_vec theta, arma::cx_mat W) {
  snaps_[block] = Snap{std::move(theta), std::move(W)};
  while (snaps_.size() > depth_) snaps_.erase(snaps_.begin());
}

const HistoryBuffer::Snap& HistoryBuffer::at(arma::uword block) const {
  auto it = snaps_.find(block);
  if (it == snaps_.end())
    throw std::out_of_range("HistoryBuffer: snapshot for block " +
                            std::to_string(block) + " not retained");
  return it->second;
}

const arma::cx_vec& HistoryBuffer::theta_at(arma::uword block) const {
  return at(block).theta;
}

const arma::cx_mat& HistoryBuffer::w_at(arma::uword block) const {
  return at(block).W;
}

CrossTermTable local_cross_contribution(const ChannelSet& ch, arma::uword b,
                                        const arma::cx_mat& W_b,
                                        const arma::cx_vec& theta_b) {
  if (W_b.n_rows != ch.N_t || W_b.n_cols != ch.K)
    throw std::invalid_argument("local_cross_contribution: precoder shape");
  CrossTermTable t(ch.K);
  const arma::cx_mat GW = ch.G_stack(b) * W_b;  // NR x K
  for (arma::uword k = 0; k < ch.K; ++k) {
    t.varpi.row(k) = ch.h(b, k).t() * W_b;
    t.vartheta.row(k) = (ch.v_stack(k) % theta_b).t() * GW;
  }
  return t;
}

InitCrossTerms init_cross_terms(const ChannelSet& ch, arma::uword b,
                                const arma::cx_mat& W0,
                                const arma::cx_vec& theta0) {
  InitCrossTerms out;
  out.outgoing = CrossTermTable(ch.K);
  out.used = local_cross_contribution(ch, b, W0, theta0);
  return out;
}

CrossTermTable outgoing_accumulate(const CrossTermTable& received_prev,
                                   const CrossTermTable& own_now) {
  CrossTermTable t = received_prev;
  t += own_now;
  return t;
}

CrossTermTable outgoing_replace(const CrossTermTable& received_prev,
                                const CrossTermTable& own_obsolete,
                                const CrossTermTable& own_now) {
  CrossTermTable t = received_prev;
  t -= own_obsolete;
  t += own_now;
  return t;
}

CrossTermTable used_accumulate(const CrossTermTable& received_now,
                               const CrossTermTable& own_now) {
  CrossTermTable t = received_now;
  t += own_now;
  return t;
}

CrossTermTable used_replace(const CrossTermTable& received_now,
                            const CrossTermTable& own_obsolete,
                            const CrossTermTable& own_now) {
  CrossTermTable t = received_now;
  t -= own_obsolete;
  t += own_now;
  return t;
}

ExchangeUpdate i1_update(const CrossTermTable& received_now,
                         const CrossTermTable& received_prev,
                         const CrossTermTable& own_now) {
  return {outgoing_accumulate(received_prev, own_now),
          used_accumulate(received_now, own_now)};
}

ExchangeUpdate i2_update(const CrossTermTable& received_now,
                         const CrossTermTable& received_prev,
                         const CrossTermTable& own_block1,
                         const CrossTermTable& own_now) {
  return {outgoing_accumulate(received_prev, own_now),
          used_replace(received_now, own_block1, own_now)};
}

ExchangeUpdate i3_update(const CrossTermTable& received_now,
                         const CrossTermTable& received_prev,
                         const CrossTermTable& own_out_obsolete,
                         const CrossTermTable& own_used_obsolete,
                         const CrossTermTable& own_now) {
  return {outgoing_replace(received_prev, own_out_obsolete, own_now),
          used_replace(received_now, own_used_obsolete, own_now)};
}

std::uint64_t count_overhead(arma::uword B, arma::uword L, arma::uword K,
                             arma::uword R, arma::uword N) {
  if (L == 0) return 0;
  const std::uint64_t per_msg = 2ull * K * K + static_cast<std::uint64_t>(R) * N;
  return static_cast<std::uint64_t>(B) * (L - 1) * per_msg;
}

}  // namespace cellfree
