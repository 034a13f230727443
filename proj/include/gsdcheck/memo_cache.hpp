#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>

namespace gsdcheck {

/// Thread-safe memo table with a hard entry cap. Once full, new keys are
/// computed but not stored, so a bounded cache never changes results.
template <typename Key, typename Value, typename Hash = std::hash<Key>>
class MemoCache {
public:
    explicit MemoCache(std::size_t max_entries = std::size_t{1} << 20) : max_entries_(max_entries) {}

    MemoCache(const MemoCache&) = delete;
    MemoCache& operator=(const MemoCache&) = delete;

    std::optional<Value> find(const Key& key) const {
        const Shard& shard = shard_for(key);
        std::shared_lock lock(shard.mutex);
        if (auto it = shard.map.find(key); it != shard.map.end()) return it->second;
        return std::nullopt;
    }

    template <typename Compute>
    Value get_or_compute(const Key& key, Compute&& compute) {
        if (auto hit = find(key)) {
            hits_.fetch_add(1, std::memory_order_relaxed);
            return *hit;
        }
        misses_.fetch_add(1, std::memory_order_relaxed);
        Value value = compute();
        if (size_.load(std::memory_order_relaxed) < max_entries_) {
            Shard& shard = shard_for(key);
            std::unique_lock lock(shard.mutex);
            if (shard.map.emplace(key, value).second) size_.fetch_add(1, std::memory_order_relaxed);
        }
        return value;
    }

    std::size_t size() const noexcept { return size_.load(std::memory_order_relaxed); }
    std::size_t hits() const noexcept { return hits_.load(std::memory_order_relaxed); }
    std::size_t misses() const noexcept { return misses_.load(std::memory_order_relaxed); }
    std::size_t capacity() const noexcept { return max_entries_; }

private:
    static constexpr std::size_t kShards = 16;

    struct Shard {
        mutable std::shared_mutex mutex;
        std::unordered_map<Key, Value, Hash> map;
    };

    Shard& shard_for(const Key& key) { return shards_[Hash{}(key) % kShards]; }
    const Shard& shard_for(const Key& key) const { return shards_[Hash{}(key) % kShards]; }

    std::array<Shard, kShards> shards_;
    std::size_t max_entries_;
    std::atomic<std::size_t> size_{0};
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

}  // namespace gsdcheck
