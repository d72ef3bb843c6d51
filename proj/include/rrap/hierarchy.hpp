#pragma once

// Three-level hierarchy: private L1 and L2 per core, shared non-inclusive
// LLC. The L2 is either a single baseline array or the RRAP split into a
// low-retention partition (LRSC, regular traffic, refreshed) and a
// high-retention partition (HRSC) holding lines the LLC saw read at least
// nr_th times with no write during their residency.
//
// Timing contract (in-order, single issue): a NonMem instruction costs one
// cycle, a load costs one cycle plus its full service latency, a store costs
// one cycle and never stalls. A core's clock never runs behind its trace.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rrap/cache.hpp"
#include "rrap/config.hpp"
#include "rrap/dsi.hpp"
#include "rrap/energy.hpp"
#include "rrap/error.hpp"
#include "rrap/refresh.hpp"
#include "rrap/report.hpp"
#include "rrap/trace.hpp"

namespace rrap {

enum class ServiceLevel : std::uint8_t { L1, L2, Llc, Memory };

struct ServiceOutcome {
    ServiceLevel level = ServiceLevel::L1;
    Cycle latency = 0;
};

// One HRSC admission as seen by the policy.
struct AdmissionRecord {
    Cycle cycle = 0;
    std::uint32_t core = 0;
    std::uint64_t address = 0;
    std::uint8_t rc = 0;               // stored counter before this read
    std::uint32_t effective_reads = 0; // LLC read hits this residency, this one included
    std::uint8_t wc = 0;
};

// InitialWriteback carries only the store that allocated the residency and
// leaves wc alone; Writeback carries a later update and sets it.
enum class LlcEventKind : std::uint8_t { Fill, ReadHit, WriteHit, Writeback, InitialWriteback, Evict, Admit };

struct LlcEvent {
    Cycle cycle = 0;
    std::uint64_t address = 0;
    LlcEventKind kind = LlcEventKind::Fill;
};

class Hierarchy {
public:
    explicit Hierarchy(HierarchyConfig cfg, std::uint32_t cores = 1) : cfg_(std::move(cfg)) {
        cfg_.validate();
        if (cores == 0) throw ConfigError("at least one core required");
        llc_ = std::make_unique<CacheArray>("llc", cfg_.llc.geometry, cfg_.llc.tech, true);
        if (cfg_.llc_refresh.enabled)
            llc_refresh_.emplace(cfg_.llc_refresh, cfg_.llc.geometry.lines(), cfg_.llc.geometry.associativity,
                                 cfg_.llc.geometry.banks, cfg_.clock_hz);
        for (std::uint32_t c = 0; c < cores; ++c) {
            Core core;
            core.l1 = std::make_unique<CacheArray>("l1", cfg_.l1.geometry, cfg_.l1.tech);
            const ArrayConfig& main = cfg_.is_rrap() ? cfg_.lrsc : cfg_.l2;
            core.l2 = std::make_unique<CacheArray>(cfg_.is_rrap() ? "lrsc" : "l2", main.geometry, main.tech);
            if (cfg_.is_rrap()) core.hrsc = std::make_unique<CacheArray>("hrsc", cfg_.hrsc.geometry, cfg_.hrsc.tech);
            if (cfg_.l2_refresh.enabled)
                core.refresh.emplace(cfg_.l2_refresh, main.geometry.lines(), main.geometry.associativity,
                                     main.geometry.banks, cfg_.clock_hz, cfg_.l2_retention());
            cores_.push_back(std::move(core));
        }
    }

    const HierarchyConfig& config() const { return cfg_; }
    std::uint32_t cores() const { return static_cast<std::uint32_t>(cores_.size()); }

    CacheArray& l1(std::uint32_t c) { return *cores_.at(c).l1; }
    // Baseline L2 or LRSC.
    CacheArray& l2(std::uint32_t c) { return *cores_.at(c).l2; }
    CacheArray& lrsc(std::uint32_t c) { require_rrap(); return *cores_.at(c).l2; }
    CacheArray& hrsc(std::uint32_t c) { require_rrap(); return *cores_.at(c).hrsc; }
    CacheArray& llc() { return *llc_; }
    const CacheArray& llc() const { return *llc_; }
    const std::optional<RefreshSchedule>& l2_refresh(std::uint32_t c) const { return cores_.at(c).refresh; }

    const std::vector<AdmissionRecord>& audit_log() const { return audit_; }
    void enable_llc_log(bool on = true) { log_llc_ = on; }
    const std::vector<LlcEvent>& llc_log() const { return llc_log_; }
    std::uint64_t mispredictions() const { return c_.mispredictions; }

    // Services one memory reference issued at `now` and returns where it was
    // served and its latency. Does not advance any core clock.
    ServiceOutcome access(std::uint32_t core, AccessKind op, std::uint64_t address, Cycle now) {
        if (op == AccessKind::NonMem) throw SimulationError("access() called with a NonMem event");
        if (finished_) throw SimulationError("access after finish()");
        Core& C = cores_.at(core);
        const std::uint64_t a = C.l1->line_address(address);
        const bool write = op == AccessKind::Write;
        write ? ++c_.writes : ++c_.reads;

        Cycle lat = C.l1->tech().read_latency_cycles;
        if (C.l1->lookup(a, op).hit) {
            write ? ++c_.l1_write_hits : ++c_.l1_read_hits;
            if (write) C.l1->set_aux(a, 0);
            return {ServiceLevel::L1, lat};
        }
        write ? ++c_.l1_write_misses : ++c_.l1_read_misses;

        // L2 probe (both partitions in parallel under RRAP).
        write ? ++c_.l2_write_probes : ++c_.l2_read_probes;
        const Cycle t2 = now + lat;
        bool l2_hit = false;
        if (!cfg_.is_rrap()) {
            CacheArray& L2 = *C.l2;
            const bool present = L2.contains(a);
            const Cycle stall = present ? data_stall(C, L2, a, t2, true) : 0;
            L2.lookup(a, op);
            lat += L2.tech().read_latency_cycles + stall;
            if (present) {
                l2_hit = true;
                if (write) on_l2_write(C, core, a, t2 + stall);
                else dsi(core).read(a, t2 + stall);
            }
        } else {
            CacheArray& L = *C.l2;
            CacheArray& H = *C.hrsc;
            const bool in_l = L.contains(a), in_h = H.contains(a);
            if (in_l && in_h) throw SimulationError("line resident in both LRSC and HRSC");
            const Cycle probe = std::max(L.tech().read_latency_cycles, H.tech().read_latency_cycles);
            Cycle stall = 0;
            if (in_l) stall = data_stall(C, L, a, t2, true);
            if (in_h) stall = data_stall(C, H, a, t2, false);
            L.lookup(a, op);
            if (write) {
                H.tag_probe(a);
            } else {
                H.lookup(a, op);
            }
            lat += probe + stall;
            if (in_l) {
                l2_hit = true;
                if (write) on_l2_write(C, core, a, t2 + stall);
                else {
                    ++c_.lrsc_read_hits;
                    dsi(core).read(a, t2 + stall);
                }
            } else if (in_h) {
                l2_hit = true;
                if (write) {
                    // The line was predicted never to be written again.
                    mispredict(C, core, a, t2 + stall, EnergyCategory::Write);
                } else {
                    ++c_.hrsc_read_hits;
                }
            }
        }
        if (l2_hit) {
            write ? ++c_.l2_write_hits : ++c_.l2_read_hits;
            lat += cfg_.l2_to_l1_transfer_cycles;
            fill_l1(C, core, a, write, now + lat);
            if (!write) {
                ++c_.l2_serviced_reads;
                c_.rst_l2 += lat;
            }
            return {ServiceLevel::L2, lat};
        }

        // LLC.
        write ? ++c_.llc_write_probes : ++c_.llc_read_probes;
        const Cycle t3 = now + lat;
        CacheArray& LLC = *llc_;
        const bool llc_present = LLC.contains(a);
        const Cycle llc_stall = llc_present ? llc_data_stall(a, t3) : 0;
        LLC.lookup(a, op);
        lat += LLC.tech().read_latency_cycles + llc_stall;
        ServiceLevel level = ServiceLevel::Llc;
        bool to_hrsc = false;
        AdmissionRecord adm;
        if (llc_present) {
            write ? ++c_.llc_write_hits : ++c_.llc_read_hits;
            lat += cfg_.llc_to_l2_transfer_cycles;
            const auto [rc, wc] = LLC.counters(a);
            if (write) {
                LLC.occupy_bank(a, t3 + llc_stall);
                LLC.bump_counters(a, AccessKind::Write);
                log(t3, a, LlcEventKind::WriteHit);
            } else {
                log(t3, a, LlcEventKind::ReadHit);
                if (cfg_.is_rrap() && cfg_.nr_th && wc == 0 && rc + 1u >= *cfg_.nr_th) {
                    // Counters stay frozen for the rest of the residency.
                    to_hrsc = true;
                    adm = {t3, core, a, rc, static_cast<std::uint32_t>(rc) + 1u, wc};
                } else {
                    LLC.bump_counters(a, AccessKind::Read);
                }
            }
        } else {
            level = ServiceLevel::Memory;
            ++c_.memory_reads;
            lat += cfg_.memory_latency_cycles + cfg_.mem_to_l2_transfer_cycles;
            const Cycle arrive = now + lat;
            // A store allocating the residency is its fill, not an update.
            install_llc(a, false, EnergyCategory::Write, arrive);
        }

        const Cycle at_l2 = now + lat;
        if (to_hrsc) admit_to_hrsc(C, core, a, at_l2, adm);
        else fill_l2(C, core, a, false, EnergyCategory::Write, at_l2);
        lat += cfg_.l2_to_l1_transfer_cycles;
        fill_l1(C, core, a, write, now + lat, write && level == ServiceLevel::Memory ? kInitialWrite : 0);
        return {level, lat};
    }

    // Replays a trace; may be called once per Hierarchy.
    void run(std::span<const TraceEvent> trace) {
        std::vector<TraceEvent> order(trace.begin(), trace.end());
        sort_for_replay(order);
        for (const auto& ev : order) step(ev);
        finish();
    }

    void step(const TraceEvent& ev) {
        if (ev.core >= cores_.size())
            throw ConfigError("trace core id " + std::to_string(ev.core) + " exceeds the configured " +
                              std::to_string(cores_.size()) + " cores");
        Core& C = cores_[ev.core];
        const Cycle t = std::max(C.time, ev.cycle);
        switch (ev.kind) {
        case AccessKind::NonMem:
            C.time = t + ev.count;
            C.instructions += ev.count;
            saw_nonmem_ = true;
            break;
        case AccessKind::Read: {
            const auto out = access(ev.core, AccessKind::Read, ev.address, t);
            c_.rst_total += out.latency;
            C.time = t + 1 + out.latency;
            C.instructions += 1;
            break;
        }
        case AccessKind::Write:
            access(ev.core, AccessKind::Write, ev.address, t);
            C.time = t + 1;
            C.instructions += 1;
            break;
        }
    }

    Cycle elapsed() const {
        Cycle m = 0;
        for (const auto& c : cores_) m = std::max(m, c.time);
        return m;
    }

    // Closes the run at the latest core clock: charges refreshes completed by
    // then, accrues leakage for every array and closes open DSI residencies.
    void finish() { finish_at(elapsed()); }

    void finish_at(Cycle end) {
        if (finished_) return;
        finished_ = true;
        end_ = std::max(end, elapsed());
        for (auto& c : cores_) {
            if (c.refresh) c.l2->charge_refreshes(c.refresh->completed_refreshes(end_));
            for (CacheArray* a : {c.l1.get(), c.l2.get(), c.hrsc.get()})
                if (a) a->energy().leakage_nj = leakage(end_, cfg_.clock_hz, a->tech().leakage_mw);
        }
        if (llc_refresh_) llc_->charge_refreshes(llc_refresh_->completed_refreshes(end_));
        llc_->energy().leakage_nj = leakage(end_, cfg_.clock_hz, llc_->tech().leakage_mw);
        for (std::uint32_t i = 0; i < cores_.size(); ++i) {
            dsi(i).finish(end_);
            for (const auto& r : dsi(i).results()) dsi_results_.push_back(r);
        }
    }

    const std::vector<dsi::DsiResult>& dsi_results() const { return dsi_results_; }

    SimReport report(const std::string& benchmark = "") const {
        if (!finished_) throw SimulationError("report() before finish()");
        SimReport r;
        r.config = cfg_.name;
        r.benchmark = benchmark;
        r.l2_variant = to_string(cfg_.l2_kind);
        r.cores = cores_.size();
        for (const auto& c : cores_) r.instructions += c.instructions;
        r.cycles = end_;
        r.ipc_available = saw_nonmem_ && r.cycles > 0;
        r.ipc = r.ipc_available ? static_cast<double>(r.instructions) / static_cast<double>(r.cycles) : 0.0;
        r.reads = c_.reads;
        r.writes = c_.writes;
        r.l1_read_hits = c_.l1_read_hits;
        r.l1_read_misses = c_.l1_read_misses;
        r.l1_write_hits = c_.l1_write_hits;
        r.l1_write_misses = c_.l1_write_misses;
        r.l2_read_probes = c_.l2_read_probes;
        r.l2_read_hits = c_.l2_read_hits;
        r.l2_read_misses = c_.l2_read_probes - c_.l2_read_hits;
        r.l2_read_miss_ratio =
            c_.l2_read_probes ? static_cast<double>(r.l2_read_misses) / static_cast<double>(c_.l2_read_probes) : 0.0;
        r.l2_write_probes = c_.l2_write_probes;
        r.l2_write_hits = c_.l2_write_hits;
        r.lrsc_read_hits = c_.lrsc_read_hits;
        r.hrsc_read_hits = c_.hrsc_read_hits;
        r.llc_read_probes = c_.llc_read_probes;
        r.llc_read_hits = c_.llc_read_hits;
        r.llc_write_probes = c_.llc_write_probes;
        r.llc_write_hits = c_.llc_write_hits;
        r.memory_reads = c_.memory_reads;
        r.memory_writebacks = c_.memory_writebacks;
        r.rst_total = c_.rst_total;
        r.rst_mean = c_.reads ? static_cast<double>(c_.rst_total) / static_cast<double>(c_.reads) : 0.0;
        r.rst_l2 = c_.rst_l2;
        r.l2_serviced_reads = c_.l2_serviced_reads;
        r.rst_l2_mean =
            c_.l2_serviced_reads ? static_cast<double>(c_.rst_l2) / static_cast<double>(c_.l2_serviced_reads) : 0.0;
        r.hrsc_admissions = c_.hrsc_admissions;
        r.hrsc_evictions = c_.hrsc_evictions;
        r.mispredictions = c_.mispredictions;

        auto add = [](ArraySummary& s, const CacheArray& a) {
            s.present = true;
            ArrayStats& d = s.stats;
            const ArrayStats& x = a.stats();
            d.read_hits += x.read_hits;
            d.read_misses += x.read_misses;
            d.write_hits += x.write_hits;
            d.write_misses += x.write_misses;
            d.fills += x.fills;
            d.evictions += x.evictions;
            d.dirty_evictions += x.dirty_evictions;
            d.invalidations += x.invalidations;
            d.refreshes += x.refreshes;
            d.refresh_stall_cycles += x.refresh_stall_cycles;
            d.bank_stall_cycles += x.bank_stall_cycles;
            for (std::size_t i = 0; i < kEnergyCategories; ++i) d.charges[i] += x.charges[i];
            s.energy += a.energy();
        };
        for (const auto& c : cores_) {
            add(r.l1, *c.l1);
            add(r.l2, *c.l2);
            if (cfg_.is_rrap()) {
                add(r.lrsc, *c.l2);
                add(r.hrsc, *c.hrsc);
                add(r.l2, *c.hrsc);
            }
        }
        add(r.llc, *llc_);
        for (const ArraySummary* s : {&r.l1, &r.l2, &r.llc}) {
            r.refresh_stall_cycles += s->stats.refresh_stall_cycles;
            r.bank_stall_cycles += s->stats.bank_stall_cycles;
        }
        r.dsi_blocks = dsi_results_.size();
        if (!dsi_results_.empty()) {
            r.dsi_ideal_retention_s = dsi::ideal_retention(std::span<const dsi::DsiResult>(dsi_results_), cfg_.clock_hz);
            const auto d = dsi::dsi_distribution(std::span<const dsi::DsiResult>(dsi_results_), dsi::Bounds{}, cfg_.clock_hz);
            r.dsi_fractions = d.fractions;
        }
        return r;
    }

    // Every array of the run: (running total, category sum, replay sum).
    struct EnergyTallies {
        Energy running, categories, replay;
    };
    EnergyTallies energy_tallies() const {
        EnergyTallies t;
        auto add = [&](const CacheArray& a) {
            t.running += a.energy().running_total;
            t.categories += a.energy().category_sum();
            t.replay += a.replay_dynamic_energy();
        };
        for (const auto& c : cores_) {
            add(*c.l1);
            add(*c.l2);
            if (c.hrsc) add(*c.hrsc);
        }
        add(*llc_);
        return t;
    }

private:
    // Upper-level line aux bit: the dirty data is only the store that
    // allocated the line's current LLC residency.
    static constexpr std::uint8_t kInitialWrite = 1;

    struct Core {
        std::unique_ptr<CacheArray> l1, l2, hrsc;  // l2 is LRSC under RRAP
        std::optional<RefreshSchedule> refresh;
        dsi::ResidencyTracker dsi;
        Cycle time = 0;
        std::uint64_t instructions = 0;
    };

    struct Counters {
        std::uint64_t reads = 0, writes = 0;
        std::uint64_t l1_read_hits = 0, l1_read_misses = 0, l1_write_hits = 0, l1_write_misses = 0;
        std::uint64_t l2_read_probes = 0, l2_read_hits = 0, l2_write_probes = 0, l2_write_hits = 0;
        std::uint64_t lrsc_read_hits = 0, hrsc_read_hits = 0;
        std::uint64_t llc_read_probes = 0, llc_read_hits = 0, llc_write_probes = 0, llc_write_hits = 0;
        std::uint64_t memory_reads = 0, memory_writebacks = 0;
        std::uint64_t rst_total = 0, rst_l2 = 0, l2_serviced_reads = 0;
        std::uint64_t hrsc_admissions = 0, hrsc_evictions = 0, mispredictions = 0;
    };

    void require_rrap() const {
        if (!cfg_.is_rrap()) throw ConfigError("configuration '" + cfg_.name + "' has no LRSC/HRSC partitions");
    }

    dsi::ResidencyTracker& dsi(std::uint32_t core) { return cores_[core].dsi; }

    void log(Cycle t, std::uint64_t a, LlcEventKind k) {
        if (log_llc_) llc_log_.push_back({t, a, k});
    }

    // Wait before a data access to `arr`: pending writes on its bank, then
    // any refresh window covering the line's bank.
    Cycle data_stall(Core& C, CacheArray& arr, std::uint64_t a, Cycle t, bool refreshed) {
        const Cycle bank = arr.bank_stall(a, t);
        arr.stats().bank_stall_cycles += bank;
        Cycle ref = 0;
        if (refreshed && C.refresh) {
            const std::uint64_t idx = arr.line_index(arr.set_of(a), 0);
            ref = C.refresh->conflict_stall(t + bank, idx);
            arr.stats().refresh_stall_cycles += ref;
        }
        return bank + ref;
    }

    Cycle llc_data_stall(std::uint64_t a, Cycle t) {
        const Cycle bank = llc_->bank_stall(a, t);
        llc_->stats().bank_stall_cycles += bank;
        Cycle ref = 0;
        if (llc_refresh_) {
            ref = llc_refresh_->conflict_stall(t + bank, llc_->line_index(llc_->set_of(a), 0));
            llc_->stats().refresh_stall_cycles += ref;
        }
        return bank + ref;
    }

    void on_l2_write(Core& C, std::uint32_t core, std::uint64_t a, Cycle t) {
        C.l2->set_aux(a, 0);
        C.l2->occupy_bank(a, t);
        dsi(core).write(a, t);
    }

    void mispredict(Core& C, std::uint32_t core, std::uint64_t a, Cycle t, EnergyCategory cat) {
        ++c_.mispredictions;
        C.hrsc->invalidate(a);
        fill_l2(C, core, a, true, cat, t);
    }

    void fill_l1(Core& C, std::uint32_t core, std::uint64_t a, bool dirty, Cycle t, std::uint8_t aux = 0) {
        const auto r = C.l1->fill(a, dirty, EnergyCategory::Write, aux);
        if (r.victim && r.victim->dirty) l1_writeback(C, core, r.victim->address, r.victim->aux, t);
    }

    // Baseline L2 or LRSC fill.
    void fill_l2(Core& C, std::uint32_t core, std::uint64_t a, bool dirty, EnergyCategory cat, Cycle t) {
        const auto r = C.l2->fill(a, dirty, cat);
        C.l2->occupy_bank(a, t);
        if (r.victim) {
            dsi(core).evict(r.victim->address, t);
            if (r.victim->dirty) llc_writeback(r.victim->address, r.victim->aux, t);
        }
        dsi(core).fill(a, t);
    }

    void admit_to_hrsc(Core& C, std::uint32_t core, std::uint64_t a, Cycle t, const AdmissionRecord& rec) {
        if (auto v = C.l2->invalidate(a)) {
            dsi(core).evict(a, t);
            if (v->dirty) llc_writeback(a, v->aux, t);
        }
        const auto r = C.hrsc->fill(a, false, EnergyCategory::Write);
        C.hrsc->occupy_bank(a, t);
        if (r.victim) {
            ++c_.hrsc_evictions;
            if (r.victim->dirty) llc_writeback(r.victim->address, r.victim->aux, t);
        }
        ++c_.hrsc_admissions;
        audit_.push_back(rec);
        log(t, a, LlcEventKind::Admit);
    }

    void l1_writeback(Core& C, std::uint32_t core, std::uint64_t a, std::uint8_t aux, Cycle t) {
        if (const CacheLineState* l = C.l2->peek(a)) {
            // Merged dirt is initial-only when both sides are.
            const std::uint8_t merged = l->dirty ? static_cast<std::uint8_t>(l->aux & aux) : aux;
            C.l2->absorb_writeback(a);
            C.l2->set_aux(a, merged);
            C.l2->occupy_bank(a, t);
            dsi(core).write(a, t);
            return;
        }
        if (C.hrsc && C.hrsc->contains(a)) {
            mispredict(C, core, a, t, EnergyCategory::Writeback);
            return;
        }
        llc_writeback(a, aux, t);
    }

    void llc_writeback(std::uint64_t a, std::uint8_t aux, Cycle t) {
        const bool initial = aux & kInitialWrite;
        if (llc_->absorb_writeback(a)) {
            llc_->occupy_bank(a, t);
        } else {
            install_llc(a, true, EnergyCategory::Writeback, t);
        }
        if (!initial) llc_->bump_counters(a, AccessKind::Write);
        log(t, a, initial ? LlcEventKind::InitialWriteback : LlcEventKind::Writeback);
    }

    void install_llc(std::uint64_t a, bool dirty, EnergyCategory cat, Cycle t) {
        const auto r = llc_->fill(a, dirty, cat);
        llc_->occupy_bank(a, t);
        if (r.victim) {
            log(t, r.victim->address, LlcEventKind::Evict);
            if (r.victim->dirty) ++c_.memory_writebacks;
        }
        log(t, a, LlcEventKind::Fill);
    }

    HierarchyConfig cfg_;
    std::vector<Core> cores_;
    std::unique_ptr<CacheArray> llc_;
    std::optional<RefreshSchedule> llc_refresh_;
    Counters c_;
    std::vector<AdmissionRecord> audit_;
    bool log_llc_ = false;
    std::vector<LlcEvent> llc_log_;
    std::vector<dsi::DsiResult> dsi_results_;
    bool saw_nonmem_ = false;
    bool finished_ = false;
    Cycle end_ = 0;
};

inline std::uint32_t cores_for(const HierarchyConfig& cfg, std::span<const TraceEvent> trace) {
    if (cfg.cores) return cfg.cores;
    std::uint32_t m = 0;
    for (const auto& e : trace) m = std::max(m, e.core + 1);
    return std::max<std::uint32_t>(m, 1);
}

inline SimReport run(std::span<const TraceEvent> trace, const HierarchyConfig& cfg, const std::string& benchmark = "") {
    Hierarchy h(cfg, cores_for(cfg, trace));
    h.run(trace);
    return h.report(benchmark);
}

} // namespace rrap
