#pragma once

#include "cbir/errors.hpp"
#include "cbir/model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <type_traits>
#include <vector>

namespace cbir {

inline constexpr int kStoreSchemaVersion = 1;

template <class T>
concept Entity = std::is_same_v<T, ImageRecord> || std::is_same_v<T, DescriptorSet> ||
                 std::is_same_v<T, Vocabulary> || std::is_same_v<T, HistogramRecord>;

template <Entity T> using Table = std::map<EntityId, T>;

namespace detail {
struct StoreState;

enum class LogOp : std::uint8_t { Put = 1, Erase = 2 };

struct PendingRecord {
    int collection = 0;
    LogOp op = LogOp::Put;
    EntityId id = 0;
    std::string payload;
};
} // namespace detail

/// Read access to a consistent store state. Only valid inside Store::read / Store::write.
class StoreView {
  public:
    template <Entity T> const T& get(EntityId id) const;
    template <Entity T> const T* find(EntityId id) const;
    template <Entity T> std::vector<T> list(const std::function<bool(const T&)>& filter = {}) const;
    template <Entity T> const Table<T>& all() const;
    template <Entity T> std::size_t count() const { return all<T>().size(); }

    const DescriptorSet* descriptors_of(ImageId image) const;
    const HistogramRecord* histogram_of(ImageId image, IndexId index) const;

  protected:
    explicit StoreView(detail::StoreState& state) : state_(&state) {}
    detail::StoreState* state_;
    friend class Store;
};

/// Mutating access. Every change is validated before it is applied; if the
/// enclosing write callback throws, all changes made through it are rolled back
/// and nothing reaches disk.
class Transaction : public StoreView {
  public:
    template <Entity T> EntityId add(T entity);
    template <Entity T> void update(const T& entity);
    template <Entity T> void remove(EntityId id);

  private:
    explicit Transaction(detail::StoreState& state) : StoreView(state) {}
    void rollback();

    std::vector<std::function<void()>> undo_;
    std::vector<detail::PendingRecord> pending_;
    friend class Store;
};

enum class OpenMode { ReadWrite, ReadOnly };

class WriterSession;

/// A directory-backed store: `meta.json` plus one append-only log per entity collection.
///
/// One writer, many readers. Mutations are serialized through the writer role;
/// reads share the data lock and only block while a commit is being applied.
/// A lock file admits a single writable handle per path across processes.
class Store {
  public:
    static std::unique_ptr<Store> open(const std::filesystem::path& path, OpenMode mode = OpenMode::ReadWrite);
    ~Store();

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    bool read_only() const noexcept { return mode_ == OpenMode::ReadOnly; }

    template <class F> auto read(F&& f) const {
        std::shared_lock lock(data_mutex_);
        return std::forward<F>(f)(static_cast<const StoreView&>(view_));
    }

    template <class F> auto write(F&& f) {
        require_writable();
        std::unique_lock role(writer_mutex_);
        return commit_locked(std::forward<F>(f));
    }

    /// Takes the writer role for a long mutation (e.g. index building) without
    /// blocking readers until the final commit.
    WriterSession begin_write();

  private:
    Store(std::filesystem::path path, OpenMode mode);
    void acquire_lock();
    void load();
    void finish(Transaction& txn);
    void write_meta();
    void require_writable() const;

    template <class F> auto commit_locked(F&& f) {
        std::unique_lock lock(data_mutex_);
        Transaction txn(*state_);
        try {
            if constexpr (std::is_void_v<std::invoke_result_t<F, Transaction&>>) {
                std::forward<F>(f)(txn);
                finish(txn);
            } else {
                auto result = std::forward<F>(f)(txn);
                finish(txn);
                return result;
            }
        } catch (...) {
            txn.rollback();
            throw;
        }
    }

    std::filesystem::path path_;
    OpenMode mode_;
    int lock_fd_ = -1;
    std::unique_ptr<detail::StoreState> state_;
    StoreView view_;
    mutable std::shared_mutex data_mutex_;
    std::mutex writer_mutex_;

    friend class WriterSession;
};

class WriterSession {
  public:
    template <class F> auto read(F&& f) const { return store_->read(std::forward<F>(f)); }
    template <class F> auto commit(F&& f) { return store_->commit_locked(std::forward<F>(f)); }

  private:
    WriterSession(Store& store, std::unique_lock<std::mutex> role) : store_(&store), role_(std::move(role)) {}
    Store* store_;
    std::unique_lock<std::mutex> role_;
    friend class Store;
};

/// Generic CRUD surface over one entity collection; higher layers depend on
/// this rather than on the storage backend.
template <Entity T> class Repository {
  public:
    virtual ~Repository() = default;
    virtual EntityId add(const T& entity) = 0;
    virtual T get(EntityId id) const = 0;
    virtual void update(const T& entity) = 0;
    virtual void remove(EntityId id) = 0;
    virtual std::vector<T> list(const std::function<bool(const T&)>& filter = {}) const = 0;
};

template <Entity T> class StoreRepository final : public Repository<T> {
  public:
    explicit StoreRepository(Store& store) : store_(&store) {}

    EntityId add(const T& entity) override {
        return store_->write([&](Transaction& txn) { return txn.add<T>(entity); });
    }
    T get(EntityId id) const override {
        return store_->read([&](const StoreView& view) { return view.get<T>(id); });
    }
    void update(const T& entity) override {
        store_->write([&](Transaction& txn) { txn.update<T>(entity); });
    }
    void remove(EntityId id) override {
        store_->write([&](Transaction& txn) { txn.remove<T>(id); });
    }
    std::vector<T> list(const std::function<bool(const T&)>& filter = {}) const override {
        return store_->read([&](const StoreView& view) { return view.list<T>(filter); });
    }

  private:
    Store* store_;
};

} // namespace cbir
