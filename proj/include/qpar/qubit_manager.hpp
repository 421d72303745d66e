#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qpar/errors.hpp"
#include "qpar/ir.hpp"

namespace qpar {

// Pool-based qubit allocator with per-section reserved pools.
//
// Outside parallel blocks, released qubits return to the global free pool
// and are reused LIFO, which deliberately reproduces the reuse-induced
// serialization of automatic memory management. Each section of a parallel
// block owns a reserved pool that starts empty and is inaccessible to
// sibling sections; the pools are merged back into the enclosing scope when
// the block ends.
class QubitManager {
public:
    struct FanoutRecord {
        int fanout_id = 0;
        int replicas = 1;
        std::vector<QubitId> originals;
        std::vector<std::vector<QubitId>> copies;  // one list per extra replica
    };

    std::vector<QubitId> allocate(std::size_t count) {
        std::vector<QubitId> out;
        out.reserve(count);
        Pool& pool = pools_[current_pool()];
        for (std::size_t i = 0; i < count; ++i) {
            QubitId q;
            if (!pool.free.empty()) {
                q = pool.free.back();
                pool.free.pop_back();
            } else {
                q = QubitId{next_fresh_++};
                owner_.push_back(pool.id);
                status_.push_back(Status::Live);
            }
            status_[q.index] = Status::Live;
            owner_[q.index] = pool.id;
            out.push_back(q);
        }
        live_count_ += count;
        return out;
    }

    void release(std::span<const QubitId> ids) {
        for (QubitId q : ids) {
            if (q.index >= next_fresh_) {
                throw LoweringError("release of unknown id " + std::to_string(q.index));
            }
            if (status_[q.index] != Status::Live) {
                throw LoweringError("double release of id " + std::to_string(q.index));
            }
            std::size_t pool = resolve(owner_[q.index]);
            pools_[pool].free.push_back(q);
            owner_[q.index] = pools_[pool].id;
            status_[q.index] = Status::Free;
            --live_count_;
        }
    }

    void release(std::initializer_list<QubitId> ids) {
        release(std::span<const QubitId>(ids.begin(), ids.size()));
    }

    void begin_parallel() {
        scopes_.push_back({ScopeKind::Parallel, current_pool(), {}, 0});
    }

    void end_parallel() {
        if (scopes_.empty() || scopes_.back().kind != ScopeKind::Parallel) {
            throw LoweringError(scopes_.empty() || scopes_.back().kind != ScopeKind::Section
                                    ? "unbalanced end_parallel"
                                    : "end_parallel with an open section");
        }
        Scope block = std::move(scopes_.back());
        scopes_.pop_back();
        std::size_t target = current_pool();
        for (std::size_t pool_id : block.child_pools) merge_pool(pool_id, target);
    }

    // Returns the block-local 0-based section index.
    int begin_section() {
        if (scopes_.empty() || scopes_.back().kind != ScopeKind::Parallel) {
            throw LoweringError("begin_section outside a parallel block");
        }
        int index = scopes_.back().section_counter++;
        pools_.push_back({pools_.size(), {}});
        merged_into_.push_back(pools_.size() - 1);
        scopes_.push_back({ScopeKind::Section, pools_.size() - 1, {}, index});
        return index;
    }

    void end_section() {
        if (scopes_.empty() || scopes_.back().kind != ScopeKind::Section) {
            throw LoweringError("unbalanced end_section");
        }
        std::size_t pool = scopes_.back().pool;
        scopes_.pop_back();
        // Retain the reserved pool for the merge at end_parallel.
        scopes_.back().child_pools.push_back(pool);
    }

    int fanout_register(std::span<const QubitId> originals, long long replicas) {
        if (replicas < 1) throw LoweringError("fanout replica count < 1");
        FanoutRecord rec;
        rec.fanout_id = next_fanout_id_++;
        rec.replicas = static_cast<int>(replicas);
        rec.originals.assign(originals.begin(), originals.end());
        for (long long r = 1; r < replicas; ++r) {
            rec.copies.push_back(allocate(originals.size()));
        }
        fanouts_.push_back(std::move(rec));
        return fanouts_.back().fanout_id;
    }

    // Replica (section_index mod replicas); replica 0 is the originals.
    std::vector<QubitId> get_copies(int fanout_id, int section_index) const {
        const FanoutRecord* rec = find_fanout(fanout_id);
        if (!rec) throw LoweringError("unknown fanout id " + std::to_string(fanout_id));
        int replica = section_index % rec->replicas;
        if (replica == 0) return rec->originals;
        return rec->copies[replica - 1];
    }

    // Pops the most recent fanout and releases its copies.
    FanoutRecord unfanout() {
        if (fanouts_.empty()) throw LoweringError("unfanout with no active fanout");
        FanoutRecord rec = std::move(fanouts_.back());
        fanouts_.pop_back();
        for (const auto& replica : rec.copies) release(replica);
        return rec;
    }

    std::uint32_t next_fresh() const { return next_fresh_; }
    std::size_t live_count() const { return live_count_; }
    bool in_section() const {
        return !scopes_.empty() && scopes_.back().kind == ScopeKind::Section;
    }
    std::size_t open_scopes() const { return scopes_.size() - 1; }
    std::size_t active_fanouts() const { return fanouts_.size(); }

    std::vector<QubitId> global_free_pool() const { return pools_[0].free; }

    // Pool conservation: {live} and the free pools partition [0, next_fresh).
    // Returns an empty string when the invariant holds.
    std::string check_conservation() const {
        std::vector<int> seen(next_fresh_, 0);
        for (const Pool& pool : pools_) {
            for (QubitId q : pool.free) {
                if (q.index >= next_fresh_) return "free pool holds unknown id";
                ++seen[q.index];
            }
        }
        std::size_t live = 0;
        for (std::uint32_t i = 0; i < next_fresh_; ++i) {
            bool is_live = status_[i] == Status::Live;
            live += is_live;
            if (is_live && seen[i] != 0) return "id " + std::to_string(i) + " live and free";
            if (!is_live && seen[i] != 1)
                return "id " + std::to_string(i) + " in " + std::to_string(seen[i]) + " pools";
        }
        if (live != live_count_) return "live count mismatch";
        return {};
    }

private:
    enum class Status : std::uint8_t { Live, Free };
    enum class ScopeKind { Root, Parallel, Section };

    struct Pool {
        std::size_t id = 0;
        std::vector<QubitId> free;
    };
    struct Scope {
        ScopeKind kind;
        std::size_t pool;                      // allocation pool for this scope
        std::vector<std::size_t> child_pools;  // Parallel: retained section pools
        int section_counter = 0;
    };

    // Allocation pool of the innermost scope; parallel blocks delegate to
    // their enclosing scope.
    std::size_t current_pool() const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            if (it->kind != ScopeKind::Parallel) return resolve(it->pool);
        }
        return 0;
    }

    std::size_t resolve(std::size_t pool_id) const {
        while (merged_into_[pool_id] != pool_id) pool_id = merged_into_[pool_id];
        return pool_id;
    }

    void merge_pool(std::size_t from, std::size_t into) {
        from = resolve(from);
        into = resolve(into);
        if (from == into) return;
        Pool& src = pools_[from];
        Pool& dst = pools_[into];
        for (QubitId q : src.free) {
            dst.free.push_back(q);
            owner_[q.index] = dst.id;
        }
        src.free.clear();
        merged_into_[from] = into;
    }

    const FanoutRecord* find_fanout(int fanout_id) const {
        for (const FanoutRecord& rec : fanouts_) {
            if (rec.fanout_id == fanout_id) return &rec;
        }
        return nullptr;
    }

    std::uint32_t next_fresh_ = 0;
    std::size_t live_count_ = 0;
    int next_fanout_id_ = 0;
    std::vector<Pool> pools_{Pool{0, {}}};
    std::vector<std::size_t> merged_into_{0};
    std::vector<Scope> scopes_{Scope{ScopeKind::Root, 0, {}, 0}};
    std::vector<std::size_t> owner_;      // per id: owning pool
    std::vector<Status> status_;          // per id
    std::vector<FanoutRecord> fanouts_;   // stack discipline
};

}  // namespace qpar
