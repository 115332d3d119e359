#include "cbir/store.hpp"

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/array.hpp>
#include <cereal/types/optional.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/utility.hpp>
#include <cereal/types/vector.hpp>
#include <json.hpp>
#include <zlib.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

namespace cbir {

// On-disk payload encodings. Bins are written sparsely; zero-weight bins are
// rematerialized on load.
template <class Archive> void serialize(Archive& ar, ImageRecord& r) {
    ar(r.id, r.name, r.classLabel, r.width, r.height, r.bytes);
}
template <class Archive> void serialize(Archive& ar, KeyPoint& p) { ar(p.x, p.y, p.scale, p.laplacianSign); }
template <class Archive> void serialize(Archive& ar, DescriptorSet& s) {
    ar(s.id, s.imageId, s.descriptors, s.points);
}
template <class Archive> void serialize(Archive& ar, IndexParams& p) {
    ar(p.k, p.maxIterations, p.convergenceEps, p.seed);
}
template <class Archive> void serialize(Archive& ar, SplitSpec& s) { ar(s.ratio, s.seed); }
template <class Archive> void serialize(Archive& ar, Vocabulary& v) {
    ar(v.id, v.k, v.centroids, v.createdAt, v.params, v.trainingSplit);
}
template <class Archive> void save(Archive& ar, const HistogramRecord& h) {
    std::vector<std::pair<std::int32_t, double>> nonzero;
    for (const auto& b : h.bins)
        if (b.weight != 0.0) nonzero.emplace_back(b.wordIndex, b.weight);
    ar(h.id, h.imageId, h.indexId, static_cast<std::int32_t>(h.bins.size()), nonzero);
}
template <class Archive> void load(Archive& ar, HistogramRecord& h) {
    std::int32_t k = 0;
    std::vector<std::pair<std::int32_t, double>> nonzero;
    ar(h.id, h.imageId, h.indexId, k, nonzero);
    if (k < 0) throw CorruptStoreError("negative histogram length");
    h.bins.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) h.bins[static_cast<std::size_t>(i)] = BinRecord{i, 0.0};
    for (const auto& [word, weight] : nonzero) {
        if (word < 0 || word >= k) throw CorruptStoreError("histogram bin index out of range");
        h.bins[static_cast<std::size_t>(word)].weight = weight;
    }
}

namespace detail {

struct StoreState {
    Table<ImageRecord> images;
    Table<DescriptorSet> descriptors;
    Table<Vocabulary> vocabularies;
    Table<HistogramRecord> histograms;
    std::map<ImageId, EntityId> descriptorsByImage;
    std::map<std::pair<ImageId, IndexId>, EntityId> histogramByPair;
    std::array<EntityId, 4> nextIds{1, 1, 1, 1};
};

} // namespace detail

namespace {

using detail::LogOp;
using detail::PendingRecord;
using detail::StoreState;

constexpr std::array<const char*, 4> kCollectionNames{"images", "descriptors", "vocabularies", "histograms"};
constexpr char kLogMagic[8] = {'C', 'B', 'I', 'R', 'L', 'O', 'G', '1'};

template <Entity T> constexpr int collection_of() {
    if constexpr (std::is_same_v<T, ImageRecord>) return 0;
    else if constexpr (std::is_same_v<T, DescriptorSet>) return 1;
    else if constexpr (std::is_same_v<T, Vocabulary>) return 2;
    else return 3;
}

template <Entity T> constexpr const char* entity_name() {
    if constexpr (std::is_same_v<T, ImageRecord>) return "image";
    else if constexpr (std::is_same_v<T, DescriptorSet>) return "descriptor set";
    else if constexpr (std::is_same_v<T, Vocabulary>) return "index";
    else return "histogram";
}

template <Entity T> Table<T>& table(StoreState& s) {
    if constexpr (std::is_same_v<T, ImageRecord>) return s.images;
    else if constexpr (std::is_same_v<T, DescriptorSet>) return s.descriptors;
    else if constexpr (std::is_same_v<T, Vocabulary>) return s.vocabularies;
    else return s.histograms;
}

std::filesystem::path log_path(const std::filesystem::path& dir, int collection) {
    return dir / (std::string(kCollectionNames[static_cast<std::size_t>(collection)]) + ".log");
}

template <Entity T> std::string encode(const T& entity) {
    std::ostringstream os(std::ios::binary);
    {
        cereal::PortableBinaryOutputArchive ar(os);
        ar(entity);
    }
    return os.str();
}

template <Entity T> T decode(const std::string& payload) {
    std::istringstream is(payload, std::ios::binary);
    T entity;
    try {
        cereal::PortableBinaryInputArchive ar(is);
        ar(entity);
    } catch (const CorruptStoreError&) {
        throw;
    } catch (const std::exception& e) {
        throw CorruptStoreError(std::string("undecodable ") + entity_name<T>() + " record: " + e.what());
    }
    return entity;
}

// Insert or replace without validation; keeps the secondary indexes in sync.
template <Entity T> void put_raw(StoreState& s, const T& entity) {
    if constexpr (std::is_same_v<T, DescriptorSet>) s.descriptorsByImage[entity.imageId] = entity.id;
    if constexpr (std::is_same_v<T, HistogramRecord>) s.histogramByPair[{entity.imageId, entity.indexId}] = entity.id;
    table<T>(s).insert_or_assign(entity.id, entity);
}

template <Entity T> void erase_raw(StoreState& s, EntityId id) {
    auto& t = table<T>(s);
    auto it = t.find(id);
    if (it == t.end()) return;
    if constexpr (std::is_same_v<T, DescriptorSet>) s.descriptorsByImage.erase(it->second.imageId);
    if constexpr (std::is_same_v<T, HistogramRecord>) s.histogramByPair.erase({it->second.imageId, it->second.indexId});
    t.erase(it);
}

void check_references(const StoreState& s, const DescriptorSet& set) {
    auto img = s.images.find(set.imageId);
    if (img == s.images.end())
        throw ValidationError("descriptor set references unknown image " + std::to_string(set.imageId));
    for (const auto& p : set.points)
        if (p.x < 0 || p.y < 0 || p.x >= img->second.width || p.y >= img->second.height)
            throw ValidationError("interest point lies outside its image");
}

void check_references(const StoreState& s, const HistogramRecord& h) {
    if (!s.images.contains(h.imageId))
        throw ValidationError("histogram references unknown image " + std::to_string(h.imageId));
    auto voc = s.vocabularies.find(h.indexId);
    if (voc == s.vocabularies.end())
        throw ValidationError("histogram references unknown index " + std::to_string(h.indexId));
    if (h.bins.size() != static_cast<std::size_t>(voc->second.k))
        throw ValidationError("histogram length does not match vocabulary size");
}

void check_references(const StoreState&, const ImageRecord&) {}
void check_references(const StoreState&, const Vocabulary&) {}

std::uint32_t record_crc(LogOp op, EntityId id, const std::string& payload) {
    uLong crc = crc32(0L, Z_NULL, 0);
    const auto op_byte = static_cast<unsigned char>(op);
    crc = crc32(crc, &op_byte, 1);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(&id), sizeof(id));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size()));
    return static_cast<std::uint32_t>(crc);
}

void write_log_header(const std::filesystem::path& file) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    const std::uint32_t version = kStoreSchemaVersion;
    os.write(kLogMagic, sizeof(kLogMagic));
    os.write(reinterpret_cast<const char*>(&version), sizeof(version));
    if (!os) throw StorageError("cannot create " + file.string());
}

struct LogEntry {
    LogOp op;
    EntityId id;
    std::string payload;
};

std::vector<LogEntry> read_log(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw CorruptStoreError("missing collection file " + file.string());
    char magic[sizeof(kLogMagic)];
    std::uint32_t version = 0;
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kLogMagic, sizeof(magic)) != 0)
        throw CorruptStoreError("bad header in " + file.string());
    if (!is.read(reinterpret_cast<char*>(&version), sizeof(version)) || version != kStoreSchemaVersion)
        throw CorruptStoreError("unsupported schema version in " + file.string());

    std::vector<LogEntry> entries;
    while (true) {
        std::uint8_t op = 0;
        if (!is.read(reinterpret_cast<char*>(&op), 1)) break;
        EntityId id = 0;
        std::uint32_t len = 0, crc = 0;
        if (!is.read(reinterpret_cast<char*>(&id), sizeof(id)) || !is.read(reinterpret_cast<char*>(&len), sizeof(len)))
            throw CorruptStoreError("truncated record in " + file.string());
        if (op != static_cast<std::uint8_t>(LogOp::Put) && op != static_cast<std::uint8_t>(LogOp::Erase))
            throw CorruptStoreError("unknown record type in " + file.string());
        std::string payload(len, '\0');
        if (!is.read(payload.data(), len) || !is.read(reinterpret_cast<char*>(&crc), sizeof(crc)))
            throw CorruptStoreError("truncated record in " + file.string());
        if (crc != record_crc(static_cast<LogOp>(op), id, payload))
            throw CorruptStoreError("checksum mismatch in " + file.string());
        entries.push_back({static_cast<LogOp>(op), id, std::move(payload)});
    }
    return entries;
}

template <Entity T> void replay(StoreState& s, const std::vector<LogEntry>& entries) {
    for (const auto& e : entries) {
        if (e.op == LogOp::Erase) {
            erase_raw<T>(s, e.id);
            continue;
        }
        T entity = decode<T>(e.payload);
        if (entity.id != e.id) throw CorruptStoreError("record id does not match its payload");
        put_raw<T>(s, entity);
        auto& next = s.nextIds[collection_of<T>()];
        next = std::max(next, e.id + 1);
    }
}

} // namespace

// ---------------------------------------------------------------------------
// StoreView

template <Entity T> const T* StoreView::find(EntityId id) const {
    const auto& t = table<T>(*state_);
    auto it = t.find(id);
    return it == t.end() ? nullptr : &it->second;
}

template <Entity T> const T& StoreView::get(EntityId id) const {
    if (const T* e = find<T>(id)) return *e;
    throw NotFoundError(std::string(entity_name<T>()) + " " + std::to_string(id) + " does not exist");
}

template <Entity T> std::vector<T> StoreView::list(const std::function<bool(const T&)>& filter) const {
    std::vector<T> out;
    for (const auto& [id, e] : table<T>(*state_))
        if (!filter || filter(e)) out.push_back(e);
    return out;
}

template <Entity T> const Table<T>& StoreView::all() const { return table<T>(*state_); }

const DescriptorSet* StoreView::descriptors_of(ImageId image) const {
    auto it = state_->descriptorsByImage.find(image);
    return it == state_->descriptorsByImage.end() ? nullptr : find<DescriptorSet>(it->second);
}

const HistogramRecord* StoreView::histogram_of(ImageId image, IndexId index) const {
    auto it = state_->histogramByPair.find({image, index});
    return it == state_->histogramByPair.end() ? nullptr : find<HistogramRecord>(it->second);
}

// ---------------------------------------------------------------------------
// Transaction

template <Entity T> EntityId Transaction::add(T entity) {
    validate(entity);
    check_references(*state_, entity);
    if constexpr (std::is_same_v<T, DescriptorSet>) {
        if (state_->descriptorsByImage.contains(entity.imageId))
            throw ValidationError("image " + std::to_string(entity.imageId) + " already has a descriptor set");
    }
    if constexpr (std::is_same_v<T, HistogramRecord>) {
        if (state_->histogramByPair.contains({entity.imageId, entity.indexId}))
            throw ValidationError("image " + std::to_string(entity.imageId) + " already has a histogram for index " +
                                  std::to_string(entity.indexId));
    }
    entity.id = state_->nextIds[collection_of<T>()]++;
    put_raw<T>(*state_, entity);
    const EntityId id = entity.id;
    undo_.push_back([s = state_, id] { erase_raw<T>(*s, id); });
    pending_.push_back({collection_of<T>(), LogOp::Put, id, encode(entity)});
    return id;
}

template <Entity T> void Transaction::update(const T& entity) {
    const T& current = get<T>(entity.id);
    validate(entity);
    check_references(*state_, entity);
    if constexpr (std::is_same_v<T, DescriptorSet>) {
        if (current.imageId != entity.imageId) throw ValidationError("a descriptor set cannot move to another image");
    }
    if constexpr (std::is_same_v<T, HistogramRecord>) {
        if (current.imageId != entity.imageId || current.indexId != entity.indexId)
            throw ValidationError("a histogram cannot change its image or index");
    }
    if constexpr (std::is_same_v<T, Vocabulary>) {
        if (current.k != entity.k) throw ValidationError("a vocabulary cannot change its size");
    }
    undo_.push_back([s = state_, previous = current] { put_raw<T>(*s, previous); });
    put_raw<T>(*state_, entity);
    pending_.push_back({collection_of<T>(), LogOp::Put, entity.id, encode(entity)});
}

template <Entity T> void Transaction::remove(EntityId id) {
    const T& current = get<T>(id);
    if constexpr (std::is_same_v<T, ImageRecord>) {
        if (const auto* set = descriptors_of(id)) remove<DescriptorSet>(set->id);
        std::vector<EntityId> doomed;
        for (const auto& [hid, h] : state_->histograms)
            if (h.imageId == id) doomed.push_back(hid);
        for (EntityId hid : doomed) remove<HistogramRecord>(hid);
    }
    if constexpr (std::is_same_v<T, Vocabulary>) {
        std::vector<EntityId> doomed;
        for (const auto& [hid, h] : state_->histograms)
            if (h.indexId == id) doomed.push_back(hid);
        for (EntityId hid : doomed) remove<HistogramRecord>(hid);
    }
    undo_.push_back([s = state_, previous = current] { put_raw<T>(*s, previous); });
    erase_raw<T>(*state_, id);
    pending_.push_back({collection_of<T>(), LogOp::Erase, id, {}});
}

void Transaction::rollback() {
    for (auto it = undo_.rbegin(); it != undo_.rend(); ++it) (*it)();
    undo_.clear();
    pending_.clear();
}

#define CBIR_INSTANTIATE_ENTITY(T)                                                                                     \
    template const T& StoreView::get<T>(EntityId) const;                                                               \
    template const T* StoreView::find<T>(EntityId) const;                                                              \
    template std::vector<T> StoreView::list<T>(const std::function<bool(const T&)>&) const;                           \
    template const Table<T>& StoreView::all<T>() const;                                                                \
    template EntityId Transaction::add<T>(T);                                                                          \
    template void Transaction::update<T>(const T&);                                                                    \
    template void Transaction::remove<T>(EntityId);

CBIR_INSTANTIATE_ENTITY(ImageRecord)
CBIR_INSTANTIATE_ENTITY(DescriptorSet)
CBIR_INSTANTIATE_ENTITY(Vocabulary)
CBIR_INSTANTIATE_ENTITY(HistogramRecord)
#undef CBIR_INSTANTIATE_ENTITY

// ---------------------------------------------------------------------------
// Store

Store::Store(std::filesystem::path path, OpenMode mode)
    : path_(std::move(path)), mode_(mode), state_(std::make_unique<detail::StoreState>()), view_(*state_) {}

Store::~Store() {
    if (lock_fd_ >= 0) {
        ::flock(lock_fd_, LOCK_UN);
        ::close(lock_fd_);
    }
}

std::unique_ptr<Store> Store::open(const std::filesystem::path& path, OpenMode mode) {
    std::unique_ptr<Store> store(new Store(path, mode));
    std::error_code ec;
    if (std::filesystem::exists(path, ec) && !std::filesystem::is_directory(path, ec))
        throw StorageError(path.string() + " exists and is not a store directory");

    if (mode == OpenMode::ReadOnly) {
        if (!std::filesystem::exists(path / "meta.json", ec)) throw StorageError("no store at " + path.string());
        store->load();
        return store;
    }

    std::filesystem::create_directories(path, ec);
    if (ec) throw StorageError("cannot create store directory " + path.string() + ": " + ec.message());
    store->acquire_lock();

    if (!std::filesystem::exists(path / "meta.json", ec)) {
        for (int c = 0; c < 4; ++c)
            if (std::filesystem::exists(log_path(path, c), ec))
                throw CorruptStoreError("store at " + path.string() + " has data files but no meta.json");
        for (int c = 0; c < 4; ++c) write_log_header(log_path(path, c));
        store->write_meta();
    } else {
        store->load();
    }
    return store;
}

void Store::acquire_lock() {
    const auto lock_file = path_ / "LOCK";
    lock_fd_ = ::open(lock_file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (lock_fd_ < 0) throw StorageError("cannot open " + lock_file.string() + ": " + std::strerror(errno));
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
        const int err = errno;
        ::close(lock_fd_);
        lock_fd_ = -1;
        if (err == EWOULDBLOCK) throw StoreLockedError("store " + path_.string() + " is already open for writing");
        throw StorageError("cannot lock " + lock_file.string() + ": " + std::strerror(err));
    }
}

void Store::load() {
    nlohmann::json meta;
    {
        std::ifstream is(path_ / "meta.json");
        if (!is) throw StorageError("cannot read " + (path_ / "meta.json").string());
        try {
            is >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw CorruptStoreError(std::string("unparseable meta.json: ") + e.what());
        }
    }
    try {
        if (meta.at("schemaVersion").get<int>() != kStoreSchemaVersion)
            throw CorruptStoreError("unsupported store schema version");
        for (std::size_t c = 0; c < 4; ++c)
            state_->nextIds[c] = meta.at("nextIds").at(kCollectionNames[c]).get<EntityId>();
    } catch (const nlohmann::json::exception& e) {
        throw CorruptStoreError(std::string("malformed meta.json: ") + e.what());
    }

    replay<ImageRecord>(*state_, read_log(log_path(path_, 0)));
    replay<DescriptorSet>(*state_, read_log(log_path(path_, 1)));
    replay<Vocabulary>(*state_, read_log(log_path(path_, 2)));
    replay<HistogramRecord>(*state_, read_log(log_path(path_, 3)));

    for (const auto& [id, set] : state_->descriptors)
        if (!state_->images.contains(set.imageId)) throw CorruptStoreError("dangling descriptor set " + std::to_string(id));
    for (const auto& [id, h] : state_->histograms)
        if (!state_->images.contains(h.imageId) || !state_->vocabularies.contains(h.indexId))
            throw CorruptStoreError("dangling histogram " + std::to_string(id));
}

void Store::write_meta() {
    nlohmann::json meta;
    meta["format"] = "cbir-store";
    meta["schemaVersion"] = kStoreSchemaVersion;
    for (std::size_t c = 0; c < 4; ++c) meta["nextIds"][kCollectionNames[c]] = state_->nextIds[c];

    const auto tmp = path_ / "meta.json.tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        os << meta.dump(2) << '\n';
        if (!os) throw StorageError("cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path_ / "meta.json", ec);
    if (ec) throw StorageError("cannot replace meta.json: " + ec.message());
}

void Store::finish(Transaction& txn) {
    if (txn.pending_.empty()) return;
    std::array<std::ofstream, 4> logs;
    for (const auto& rec : txn.pending_) {
        auto& os = logs[static_cast<std::size_t>(rec.collection)];
        if (!os.is_open()) {
            os.open(log_path(path_, rec.collection), std::ios::binary | std::ios::app);
            if (!os) throw StorageError("cannot append to " + log_path(path_, rec.collection).string());
        }
        const auto op = static_cast<std::uint8_t>(rec.op);
        const auto len = static_cast<std::uint32_t>(rec.payload.size());
        const std::uint32_t crc = record_crc(rec.op, rec.id, rec.payload);
        os.write(reinterpret_cast<const char*>(&op), 1);
        os.write(reinterpret_cast<const char*>(&rec.id), sizeof(rec.id));
        os.write(reinterpret_cast<const char*>(&len), sizeof(len));
        os.write(rec.payload.data(), static_cast<std::streamsize>(rec.payload.size()));
        os.write(reinterpret_cast<const char*>(&crc), sizeof(crc));
    }
    for (auto& os : logs) {
        if (!os.is_open()) continue;
        os.flush();
        if (!os) throw StorageError("write to store failed");
    }
    write_meta();
}

void Store::require_writable() const {
    if (mode_ == OpenMode::ReadOnly) throw StorageError("store " + path_.string() + " is open read-only");
}

WriterSession Store::begin_write() {
    require_writable();
    return WriterSession(*this, std::unique_lock(writer_mutex_));
}

} // namespace cbir
