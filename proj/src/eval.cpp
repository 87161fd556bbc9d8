#include "war/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "war/errors.hpp"
#include "war/sharing.hpp"

namespace war {

namespace {

std::uint64_t key(std::uint32_t a, std::uint32_t b) { return (std::uint64_t{a} << 32) | b; }

}  // namespace

TripletFilter::TripletFilter(const std::vector<const KnowledgeGraph*>& graphs) {
  for (const auto* g : graphs) {
    for (const auto& t : g->triplets()) add(t);
  }
  finalize();
}

void TripletFilter::add(const Triplet& t) {
  tails_[key(t.head, t.relation)].push_back(t.tail);
  heads_[key(t.relation, t.tail)].push_back(t.head);
}

void TripletFilter::finalize() {
  for (auto* m : {&tails_, &heads_}) {
    for (auto& [k, v] : *m) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }
}

const std::vector<EntityId>* TripletFilter::tails(EntityId h, RelationId r) const {
  auto it = tails_.find(key(h, r));
  return it == tails_.end() ? nullptr : &it->second;
}

const std::vector<EntityId>* TripletFilter::heads(RelationId r, EntityId t) const {
  auto it = heads_.find(key(r, t));
  return it == heads_.end() ? nullptr : &it->second;
}

namespace {

/// Score of candidate e against a fixed query vector: TransE -||q - e||, DistMult q.e.
double query_score(std::span<const double> q, std::span<const double> e, Scoring scoring) {
  double acc = 0.0;
  switch (scoring) {
    case Scoring::TransE_L1:
      for (std::size_t i = 0; i < q.size(); ++i) acc += std::abs(q[i] - e[i]);
      return -acc;
    case Scoring::TransE_L2:
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double v = q[i] - e[i];
        acc += v * v;
      }
      return -std::sqrt(acc);
    case Scoring::DistMult:
      for (std::size_t i = 0; i < q.size(); ++i) acc += q[i] * e[i];
      return acc;
  }
  return 0.0;
}

std::size_t rank_side(std::span<const double> query, EntityId truth, const EmbeddingState& state,
                      Scoring scoring, const std::vector<EntityId>* known, const RankingOptions& opt) {
  const double pos = query_score(query, state.entities.row(truth), scoring);
  const bool filtered = opt.protocol == Protocol::Filtered && known != nullptr;
  std::size_t better = 0;
  for (std::size_t e = 0; e < state.num_entities(); ++e) {
    if (e == truth) continue;
    const double s = query_score(query, state.entities.row(e), scoring);
    const bool beats = opt.ties == TiePolicy::Optimistic ? s > pos : s >= pos;
    if (!beats) continue;
    if (filtered && std::binary_search(known->begin(), known->end(), static_cast<EntityId>(e))) continue;
    ++better;
  }
  return better + 1;
}

}  // namespace

TripletRanks rank_triplet(const Triplet& t, const EmbeddingState& state, Scoring scoring,
                          const TripletFilter* filter, const RankingOptions& options) {
  const auto r = relation_representation(t.relation, state);
  const auto h = state.entities.row(t.head);
  const auto tl = state.entities.row(t.tail);
  const std::size_t d = state.dim();
  std::vector<double> tail_query(d), head_query(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (scoring == Scoring::DistMult) {
      tail_query[i] = h[i] * r[i];
      head_query[i] = r[i] * tl[i];
    } else {
      tail_query[i] = h[i] + r[i];  // -||(h + r) - e||
      head_query[i] = tl[i] - r[i];  // -||e - (t - r)||
    }
  }
  const bool use_filter = options.protocol == Protocol::Filtered && filter != nullptr;
  TripletRanks out;
  out.tail = rank_side(tail_query, t.tail, state, scoring,
                       use_filter ? filter->tails(t.head, t.relation) : nullptr, options);
  out.head = rank_side(head_query, t.head, state, scoring,
                       use_filter ? filter->heads(t.relation, t.tail) : nullptr, options);
  return out;
}

RankingResult compute_metrics(std::vector<std::size_t> ranks, Protocol protocol) {
  if (ranks.empty()) throw ConfigError("cannot compute ranking metrics over zero ranks");
  RankingResult r;
  r.protocol = protocol;
  r.q = ranks.size();
  double sum = 0.0, recip = 0.0;
  std::size_t h1 = 0, h3 = 0, h10 = 0;
  for (std::size_t rank : ranks) {
    sum += static_cast<double>(rank);
    recip += 1.0 / static_cast<double>(rank);
    h1 += rank <= 1;
    h3 += rank <= 3;
    h10 += rank <= 10;
  }
  const double q = static_cast<double>(ranks.size());
  r.mr = sum / q;
  r.mrr = recip / q;
  r.hits1 = static_cast<double>(h1) / q;
  r.hits3 = static_cast<double>(h3) / q;
  r.hits10 = static_cast<double>(h10) / q;
  r.ranks = std::move(ranks);
  return r;
}

RankingResult evaluate(const KnowledgeGraph& graph, const EmbeddingState& state, Scoring scoring,
                       const TripletFilter* filter, const RankingOptions& options,
                       std::size_t max_triplets, unsigned threads) {
  std::size_t n = graph.num_edges();
  if (max_triplets > 0) n = std::min(n, max_triplets);
  std::vector<std::size_t> ranks(2 * n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = rank_triplet(graph.edge(static_cast<EdgeId>(i)), state, scoring, filter, options);
      ranks[2 * i] = r.head;
      ranks[2 * i + 1] = r.tail;
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, n));
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& t : pool) t.join();
  }
  return compute_metrics(std::move(ranks), options.protocol);
}

const char* protocol_name(Protocol p) { return p == Protocol::Raw ? "raw" : "filtered"; }

std::string metrics_json(const RankingResult& r) {
  nlohmann::ordered_json j;
  j["mrr"] = r.mrr;
  j["mr"] = r.mr;
  j["hits1"] = r.hits1;
  j["hits3"] = r.hits3;
  j["hits10"] = r.hits10;
  j["protocol"] = protocol_name(r.protocol);
  j["q"] = r.q;
  return j.dump();
}

std::string metrics_table(const RankingResult& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "protocol  " << protocol_name(r.protocol) << "  (Q=" << r.q << ")\n"
      << "MRR       " << r.mrr << '\n'
      << "MR        " << std::setprecision(1) << r.mr << std::setprecision(4) << '\n'
      << "Hits@1    " << r.hits1 << '\n'
      << "Hits@3    " << r.hits3 << '\n'
      << "Hits@10   " << r.hits10 << '\n';
  return out.str();
}

}  // namespace war
