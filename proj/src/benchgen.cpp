#include "vptt/benchgen.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "vptt/common.hpp"
#include "vptt/hash.hpp"
#include "vptt/textutil.hpp"

namespace vptt::benchgen {

namespace {

constexpr std::uint64_t salt_str(const char* s) { return fnv1a64(s); }

std::string pad_number(std::uint64_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*llu", width, static_cast<unsigned long long>(value));
    return buf;
}

template <typename T>
const T& pick(rng& r, const std::vector<T>& pool) {
    if (pool.empty()) throw error(errc::invalid_argument, "pick from empty pool");
    return pool[static_cast<std::size_t>(r.next_below(pool.size()))];
}

// First k entries of a seeded Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> sample_indices(rng& r, std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    k = std::min(k, n);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(r.next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace

attribute_space attribute_space::defaults() {
    attribute_space s;
    s.attributes = {
        {"face shape", {"oval", "round", "square", "heart-shaped", "oblong"}},
        {"eye shape", {"almond", "round", "hooded", "monolid", "upturned", "downturned"}},
        {"eye size", {"small", "medium", "large", "wide-set"}},
        {"nose type", {"straight", "aquiline", "button", "broad", "narrow"}},
        {"jawline", {"soft", "defined", "angular", "rounded"}},
        {"cheekbones", {"high", "low", "prominent", "subtle"}},
        {"lip shape", {"full", "thin", "bow-shaped", "wide", "heart-shaped"}},
        {"eyebrow type", {"arched", "straight", "thick", "thin", "feathered"}},
        {"face length", {"short", "average", "long", "elongated"}},
        {"chin shape", {"pointed", "rounded", "square", "cleft", "recessed"}},
    };
    s.age_modifiers = {"bright eyes", "youthful glow", "subtle smile lines", "wisdom lines",
                       "silver accents"};
    s.expressions = {"confident", "warm smile", "contemplative", "joyful"};
    s.styles = {"professional portrait", "candid outdoor", "studio lighting",
                "soft natural light"};
    return s;
}

void validate_space(const attribute_space& space) {
    if (space.attributes.empty())
        throw error(errc::invalid_argument, "attribute space has no dimensions");
    for (const auto& dim : space.attributes) {
        if (dim.name.empty())
            throw error(errc::invalid_argument, "attribute dimension with empty name");
        if (dim.options.empty())
            throw error(errc::invalid_argument, "attribute '" + dim.name + "' has no options");
    }
    if (space.age_modifiers.empty() || space.expressions.empty() || space.styles.empty())
        throw error(errc::invalid_argument, "age modifiers, expressions and styles must be non-empty");
}

std::uint64_t seed_index(std::uint64_t i, std::uint64_t universe) {
    if (universe == 0) throw error(errc::invalid_argument, "seed universe must be positive");
    return stable_hash(i) % universe;
}

std::uint32_t face_seed(const std::string& user_id, std::uint64_t age) {
    std::uint64_t h = stable_hash(user_id, stable_hash(age / 10, salt_str("face")));
    return static_cast<std::uint32_t>(h); // mod 2^32
}

attribute_assignment sample_attributes(std::uint32_t seed, const attribute_space& space) {
    validate_space(space);
    rng r(mix64(static_cast<std::uint64_t>(seed) ^ salt_str("attributes")));
    attribute_assignment out;
    out.attributes.reserve(space.attributes.size());
    for (const auto& dim : space.attributes)
        out.attributes.emplace_back(dim.name, pick(r, dim.options));
    out.age_modifier = pick(r, space.age_modifiers);
    out.expression = pick(r, space.expressions);
    out.style = pick(r, space.styles);
    return out;
}

std::string combination_count(const attribute_space& space) {
    // base-1e9 limbs, little-endian; the product exceeds 64 bits for larger
    // configured spaces so keep it exact
    std::vector<std::uint32_t> limbs{1};
    auto mul = [&limbs](std::uint64_t factor) {
        if (factor == 0) {
            limbs.assign(1, 0);
            return;
        }
        std::uint64_t carry = 0;
        for (auto& limb : limbs) {
            std::uint64_t cur = static_cast<std::uint64_t>(limb) * factor + carry;
            limb = static_cast<std::uint32_t>(cur % 1000000000ull);
            carry = cur / 1000000000ull;
        }
        while (carry != 0) {
            limbs.push_back(static_cast<std::uint32_t>(carry % 1000000000ull));
            carry /= 1000000000ull;
        }
    };
    for (const auto& dim : space.attributes) mul(dim.options.size());
    mul(space.age_modifiers.size());
    mul(space.expressions.size());
    mul(space.styles.size());

    std::string out = std::to_string(limbs.back());
    for (auto it = limbs.rbegin() + 1; it != limbs.rend(); ++it)
        out += pad_number(*it, 9);
    return out;
}

const std::vector<region_entry>& region_table() {
    static const std::vector<region_entry> table = {
        {"India", "Jaipur", "South Asia"},
        {"Pakistan", "Lahore", "South Asia"},
        {"Bangladesh", "Dhaka", "South Asia"},
        {"Sri Lanka", "Galle", "South Asia"},
        {"Nepal", "Pokhara", "South Asia"},
        {"Bhutan", "Thimphu", "South Asia"},
        {"Maldives", "Male", "South Asia"},
        {"China", "Chengdu", "East Asia"},
        {"Japan", "Kyoto", "East Asia"},
        {"South Korea", "Busan", "East Asia"},
        {"Mongolia", "Ulaanbaatar", "East Asia"},
        {"Taiwan", "Tainan", "East Asia"},
        {"Vietnam", "Hoi An", "Southeast Asia"},
        {"Thailand", "Chiang Mai", "Southeast Asia"},
        {"Indonesia", "Yogyakarta", "Southeast Asia"},
        {"Malaysia", "Penang", "Southeast Asia"},
        {"Philippines", "Cebu", "Southeast Asia"},
        {"Singapore", "Singapore", "Southeast Asia"},
        {"Cambodia", "Siem Reap", "Southeast Asia"},
        {"Laos", "Luang Prabang", "Southeast Asia"},
        {"Myanmar", "Mandalay", "Southeast Asia"},
        {"Brunei", "Bandar Seri Begawan", "Southeast Asia"},
        {"Kazakhstan", "Almaty", "Central Asia"},
        {"Uzbekistan", "Samarkand", "Central Asia"},
        {"Kyrgyzstan", "Bishkek", "Central Asia"},
        {"Tajikistan", "Dushanbe", "Central Asia"},
        {"Turkmenistan", "Ashgabat", "Central Asia"},
        {"Turkey", "Izmir", "Middle East"},
        {"Iran", "Isfahan", "Middle East"},
        {"Iraq", "Erbil", "Middle East"},
        {"Israel", "Haifa", "Middle East"},
        {"Jordan", "Amman", "Middle East"},
        {"Lebanon", "Beirut", "Middle East"},
        {"Saudi Arabia", "Jeddah", "Middle East"},
        {"United Arab Emirates", "Abu Dhabi", "Middle East"},
        {"Qatar", "Doha", "Middle East"},
        {"Oman", "Muscat", "Middle East"},
        {"Kuwait", "Kuwait City", "Middle East"},
        {"Bahrain", "Manama", "Middle East"},
        {"Yemen", "Sanaa", "Middle East"},
        {"Syria", "Aleppo", "Middle East"},
        {"United Kingdom", "Manchester", "Europe"},
        {"Ireland", "Galway", "Europe"},
        {"France", "Lyon", "Europe"},
        {"Germany", "Leipzig", "Europe"},
        {"Netherlands", "Utrecht", "Europe"},
        {"Belgium", "Ghent", "Europe"},
        {"Luxembourg", "Luxembourg City", "Europe"},
        {"Switzerland", "Lausanne", "Europe"},
        {"Austria", "Graz", "Europe"},
        {"Italy", "Bologna", "Europe"},
        {"Spain", "Valencia", "Europe"},
        {"Portugal", "Porto", "Europe"},
        {"Greece", "Thessaloniki", "Europe"},
        {"Poland", "Krakow", "Europe"},
        {"Czechia", "Brno", "Europe"},
        {"Slovakia", "Bratislava", "Europe"},
        {"Hungary", "Szeged", "Europe"},
        {"Romania", "Cluj-Napoca", "Europe"},
        {"Bulgaria", "Plovdiv", "Europe"},
        {"Croatia", "Split", "Europe"},
        {"Slovenia", "Ljubljana", "Europe"},
        {"Serbia", "Novi Sad", "Europe"},
        {"Bosnia and Herzegovina", "Sarajevo", "Europe"},
        {"Albania", "Tirana", "Europe"},
        {"North Macedonia", "Skopje", "Europe"},
        {"Denmark", "Aarhus", "Europe"},
        {"Norway", "Bergen", "Europe"},
        {"Sweden", "Gothenburg", "Europe"},
        {"Finland", "Tampere", "Europe"},
        {"Iceland", "Reykjavik", "Europe"},
        {"Estonia", "Tartu", "Europe"},
        {"Latvia", "Riga", "Europe"},
        {"Lithuania", "Kaunas", "Europe"},
        {"Ukraine", "Lviv", "Europe"},
        {"Moldova", "Chisinau", "Europe"},
        {"Malta", "Valletta", "Europe"},
        {"Cyprus", "Limassol", "Europe"},
        {"Egypt", "Alexandria", "Africa"},
        {"Morocco", "Fes", "Africa"},
        {"Algeria", "Oran", "Africa"},
        {"Tunisia", "Sousse", "Africa"},
        {"Libya", "Benghazi", "Africa"},
        {"Nigeria", "Ibadan", "Africa"},
        {"Ghana", "Kumasi", "Africa"},
        {"Senegal", "Dakar", "Africa"},
        {"Ivory Coast", "Abidjan", "Africa"},
        {"Kenya", "Mombasa", "Africa"},
        {"Tanzania", "Zanzibar City", "Africa"},
        {"Uganda", "Kampala", "Africa"},
        {"Ethiopia", "Addis Ababa", "Africa"},
        {"Rwanda", "Kigali", "Africa"},
        {"South Africa", "Durban", "Africa"},
        {"Namibia", "Windhoek", "Africa"},
        {"Botswana", "Gaborone", "Africa"},
        {"Zimbabwe", "Bulawayo", "Africa"},
        {"Zambia", "Livingstone", "Africa"},
        {"Mozambique", "Maputo", "Africa"},
        {"Madagascar", "Antananarivo", "Africa"},
        {"Cameroon", "Douala", "Africa"},
        {"Angola", "Luanda", "Africa"},
        {"United States", "Portland", "North America"},
        {"Canada", "Montreal", "North America"},
        {"Mexico", "Oaxaca", "North America"},
        {"Guatemala", "Antigua Guatemala", "North America"},
        {"Costa Rica", "San Jose", "North America"},
        {"Panama", "Panama City", "North America"},
        {"Cuba", "Trinidad", "North America"},
        {"Jamaica", "Kingston", "North America"},
        {"Dominican Republic", "Santiago de los Caballeros", "North America"},
        {"Haiti", "Cap-Haitien", "North America"},
        {"Brazil", "Salvador", "South America"},
        {"Argentina", "Mendoza", "South America"},
        {"Chile", "Valparaiso", "South America"},
        {"Peru", "Cusco", "South America"},
        {"Colombia", "Medellin", "South America"},
        {"Ecuador", "Cuenca", "South America"},
        {"Bolivia", "Sucre", "South America"},
        {"Paraguay", "Asuncion", "South America"},
        {"Uruguay", "Montevideo", "South America"},
        {"Venezuela", "Merida", "South America"},
        {"Australia", "Hobart", "Oceania"},
        {"New Zealand", "Wellington", "Oceania"},
        {"Fiji", "Suva", "Oceania"},
        {"Papua New Guinea", "Port Moresby", "Oceania"},
        {"Samoa", "Apia", "Oceania"},
    };
    return table;
}

std::vector<std::pair<std::string, double>> scaffold_config::default_override_rates() {
    return {
        {"South Asia", 0.70},
        {"United States", 0.65},
        {"United Kingdom", 0.60},
        {"Canada", 0.50},
    };
}

void validate_scaffold_config(const scaffold_config& cfg) {
    if (cfg.seed_universe == 0)
        throw error(errc::invalid_argument, "seed universe must be positive");
    if (cfg.post_count < min_valid_posts)
        throw error(errc::invalid_argument, "post count below the minimum valid history");
    if (cfg.categories.empty())
        throw error(errc::invalid_argument, "no element categories configured");
    for (const auto& [key, rate] : cfg.override_rates) {
        if (key.empty())
            throw error(errc::invalid_argument, "override rate with empty key");
        if (!(rate >= 0.0 && rate <= 1.0))
            throw error(errc::invalid_argument, "override rate outside [0, 1]: " + key);
    }
}

template_set template_set::defaults() {
    template_set t;
    t.category_phrases = {
        {"foreground",
         {"next to a {e}", "with a {e} up front", "beside the {e}", "a {e} stealing the frame"}},
        {"background",
         {"with the {e} behind me", "against a {e}", "the {e} fading into the distance",
          "backed by the {e}"}},
        {"lighting", {"in {e}", "under {e}", "lit by {e}", "bathed in {e}"}},
        {"pose", {"caught in a {e}", "striking a {e}", "settling into a {e}", "holding a {e}"}},
        {"actions", {"busy {e}", "caught {e}", "happily {e}", "spotted {e}"}},
        {"materials",
         {"surrounded by {e}", "all {e} textures", "loving the {e} details", "so much {e} here"}},
        {"environment",
         {"somewhere in the {e}", "deep in the {e}", "out at the {e}", "wandering the {e}"}},
        {"appearance",
         {"wearing my {e}", "in the {e} again", "breaking out the {e}", "paired with a {e}"}},
        {"objects",
         {"with my {e} along", "never without the {e}", "my {e} made the trip",
          "the {e} came too"}},
    };
    t.type_openers = {
        {"activity",
         {"Spent the whole afternoon", "Finally made time for a slow morning,",
          "Lost track of time today,", "Back at it again,", "Sunday ritual:",
          "Squeezed in a golden hour,"}},
        {"appreciation",
         {"Can't stop looking at this,", "Completely smitten today,", "A small ode to the day,",
          "Still thinking about this moment,", "Quiet appreciation post,",
          "This caught my eye,"}},
        {"shared_content",
         {"Passing this along,", "Found this gem while wandering,", "Sharing before I forget,",
          "A friend pointed me here,", "Stumbled across this spot,", "Saving this one here,"}},
        {"selfie",
         {"Quick self-portrait,", "Obligatory mirror check,", "Caught myself smiling,",
          "One for the archive,", "Rare appearance from me,", "Documented proof I went outside,"}},
    };
    t.closers = {"Couldn't have asked for more.",
                 "Home feels close today.",
                 "Filing this one away.",
                 "More of this, please.",
                 "Back again soon, I hope.",
                 "Small things, big joy.",
                 "Someone had to document it.",
                 "Grateful for days like this."};
    return t;
}

void validate_templates(const template_set& templates,
                        const std::vector<std::string>& categories) {
    for (const auto& cat : categories) {
        auto it = templates.category_phrases.find(cat);
        if (it == templates.category_phrases.end() || it->second.empty())
            throw error(errc::data, "template missing a category: " + cat);
    }
    if (templates.type_openers.empty() || templates.closers.empty())
        throw error(errc::data, "template set needs openers and closers");
    for (const auto& [type, openers] : templates.type_openers)
        if (openers.empty()) throw error(errc::data, "template missing openers for " + type);
}

namespace {

// --- demographics pools -----------------------------------------------------

const std::vector<std::string>& occupations() {
    static const std::vector<std::string> v = {
        "accountant", "architect", "baker", "barista", "bookbinder", "botanist", "carpenter",
        "cartographer", "ceramicist", "chef", "choreographer", "civil engineer", "composer",
        "copywriter", "dance instructor", "data analyst", "dentist", "electrician",
        "event planner", "farmer", "film editor", "firefighter", "florist", "game designer",
        "geologist", "glassblower", "graphic designer", "historian", "illustrator", "interpreter",
        "jeweler", "journalist", "landscape gardener", "librarian", "machinist", "makeup artist",
        "marine biologist", "midwife", "muralist", "music teacher", "nurse", "optometrist",
        "paralegal", "pastry chef", "photographer", "physiotherapist", "pilot", "product manager",
        "professor", "radiologist", "school teacher", "social worker", "software engineer",
        "sound engineer", "stage actor", "tailor", "tattoo artist", "tour guide", "translator",
        "urban planner", "veterinarian", "watchmaker", "welder", "yoga instructor"};
    return v;
}

const std::vector<std::string>& interest_pool() {
    static const std::vector<std::string> v = {
        "analog photography", "archery", "astronomy", "baking sourdough", "beekeeping",
        "birdwatching", "bouldering", "calligraphy", "ceramics", "chess", "cycling",
        "documentary films", "embroidery", "fermentation", "flea markets", "foraging",
        "gardening", "hiking", "home espresso", "indoor plants", "jazz records", "kayaking",
        "kite flying", "knitting", "letterpress printing", "longboarding", "marathon running",
        "origami", "poetry readings", "pottery", "salsa dancing", "sketching strangers",
        "stargazing", "street food tours", "swing dancing", "thrifting", "trail running",
        "urban sketching", "vintage synthesizers", "watercolor painting", "wild swimming",
        "woodworking"};
    return v;
}

const std::vector<std::string>& trait_pool() {
    static const std::vector<std::string> v = {
        "curious", "meticulous", "easygoing", "adventurous", "reserved", "playful", "pragmatic",
        "sentimental", "observant", "stubborn", "generous", "wry", "earnest", "restless",
        "methodical", "daydreaming"};
    return v;
}

const std::vector<std::string>& tone_pool() {
    static const std::vector<std::string> v = {
        "warm and chatty", "dry and understated", "enthusiastic with frequent exclamations",
        "thoughtful and descriptive", "terse and matter-of-fact", "poetic and meandering",
        "self-deprecating and funny", "polished and editorial"};
    return v;
}

const std::vector<std::string>& education_pool() {
    static const std::vector<std::string> v = {"high school", "trade certificate",
                                               "bachelor's degree", "master's degree",
                                               "doctorate"};
    return v;
}

const std::vector<std::string>& ethnicity_pool() {
    static const std::vector<std::string> v = {
        "East Asian", "South Asian",        "Southeast Asian", "Middle Eastern", "Black",
        "White",      "Hispanic or Latino", "Indigenous",      "Mixed"};
    return v;
}

std::string region_primary_ethnicity(const std::string& region) {
    if (region == "South Asia") return "South Asian";
    if (region == "East Asia") return "East Asian";
    if (region == "Southeast Asia") return "Southeast Asian";
    if (region == "Middle East") return "Middle Eastern";
    if (region == "Europe") return "White";
    if (region == "Africa") return "Black";
    if (region == "South America") return "Hispanic or Latino";
    if (region == "Oceania") return "Mixed";
    return "Mixed"; // North America, Central Asia
}

// --- element banks ----------------------------------------------------------

struct element_bank {
    std::vector<std::string> adjectives;
    std::vector<std::string> nouns;
};

const std::map<std::string, element_bank>& element_banks() {
    static const std::map<std::string, element_bank> banks = {
        {"foreground",
         {{"weathered", "hand-painted", "overgrown", "freshly cut", "antique", "sun-faded",
           "gleaming", "cluttered", "minimalist", "borrowed", "mismatched", "well-worn"},
          {"bicycle", "market stall", "coffee cup", "stack of books", "flower cart",
           "wooden bench", "fruit bowl", "street sign", "easel", "picnic blanket",
           "record player", "typewriter"}}},
        {"background",
         {{"distant", "hazy", "crowded", "quiet", "rain-streaked", "snow-dusted", "terraced",
           "industrial", "pastel", "brick-lined", "ivy-covered", "lantern-lit"},
          {"skyline", "harbor", "hillside", "courtyard", "rooftops", "train platform", "orchard",
           "promenade", "alleyway", "ferris wheel", "cathedral square", "river bend"}}},
        {"lighting",
         {{"golden-hour", "overcast", "dappled", "neon", "candlelit", "harsh midday",
           "soft window", "backlit", "dusky", "fluorescent", "moonlit", "storm-filtered"},
          {"glow", "light", "haze", "shimmer", "spill", "beams", "wash", "flicker", "gleam",
           "halo", "glare", "shadows"}}},
        {"pose",
         {{"relaxed", "mid-laugh", "over-the-shoulder", "cross-legged", "leaning", "windblown",
           "candid", "half-turned", "arms-crossed", "tiptoe", "slouched", "mirror-framed"},
          {"stance", "glance", "profile", "lean", "stretch", "shrug", "perch", "twirl", "stride",
           "pause", "silhouette", "gesture"}}},
        {"actions",
         {{"absentmindedly", "carefully", "theatrically", "hurriedly", "patiently", "clumsily",
           "gleefully", "quietly", "expertly", "half-heartedly", "ritually", "stubbornly"},
          {"pouring tea", "kneading dough", "tuning a guitar", "sketching passersby",
           "repotting ferns", "juggling oranges", "lacing boots", "shuffling cards",
           "folding laundry", "skipping stones", "waxing a surfboard", "threading a loom"}}},
        {"materials",
         {{"raw", "polished", "hammered", "woven", "cracked", "lacquered", "unglazed", "rusted",
           "bleached", "embroidered", "marbled", "recycled"},
          {"linen", "copper", "terracotta", "rattan", "denim", "birch plywood", "velvet",
           "concrete", "stained glass", "leather", "wool felt", "mother-of-pearl"}}},
        {"environment",
         {{"foggy", "sun-drenched", "bustling", "deserted", "cobblestoned", "tropical", "alpine",
           "coastal", "midnight", "autumnal", "rain-soaked", "wind-swept"},
          {"fish market", "botanical garden", "night bazaar", "boardwalk", "pine forest",
           "tea house", "metro station", "vineyard", "lighthouse point", "sculpture park",
           "canal district", "rooftop terrace"}}},
        {"appearance",
         {{"paint-splattered", "pinstriped", "thrifted", "hand-knitted", "linen", "silk",
           "patchwork", "monochrome", "saffron", "indigo-dyed", "oversized", "tailored"},
          {"overalls", "scarf", "sundress", "blazer", "cardigan", "headwrap", "apron", "raincoat",
           "jumpsuit", "kimono jacket", "beanie", "espadrilles"}}},
        {"objects",
         {{"chipped", "brass", "folding", "dog-eared", "enamel", "wicker", "secondhand",
           "miniature", "inherited", "hand-bound", "translucent", "magnetic"},
          {"teapot", "field notebook", "pocket watch", "chess set", "thermos", "film camera",
           "umbrella", "compass", "harmonica", "spice tins", "binoculars", "watering can"}}},
    };
    return banks;
}

// Region-flavored adjectives, mixed into the texture-carrying categories so
// element libraries read as locally grounded rather than interchangeable.
const std::vector<std::string>& regional_flair(const std::string& region) {
    static const std::map<std::string, std::vector<std::string>> flair = {
        {"South Asia", {"marigold-strung", "monsoon-washed", "sandstone", "silk-draped"}},
        {"East Asia", {"lacquer-red", "bamboo-shaded", "calligraphy-lined", "porcelain"}},
        {"Southeast Asia",
         {"batik-patterned", "mangrove-fringed", "rattan-woven", "frangipani-scented"}},
        {"Central Asia", {"steppe-worn", "felt-lined", "turquoise-tiled", "caravan-route"}},
        {"Middle East", {"mosaic-tiled", "date-palm", "saffron-dusted", "cedar-scented"}},
        {"Europe", {"cobblestone", "wrought-iron", "fresco-painted", "half-timbered"}},
        {"Africa", {"kente-bright", "acacia-shaded", "clay-plastered", "beadwork"}},
        {"North America", {"clapboard", "diner-chrome", "maple-shaded", "adobe"}},
        {"South America", {"andean-wool", "samba-bright", "colonial-tiled", "rainforest-green"}},
        {"Oceania", {"eucalyptus", "reef-blue", "weatherboard", "fern-lined"}},
    };
    static const std::vector<std::string> none;
    auto it = flair.find(region);
    return it == flair.end() ? none : it->second;
}

bool category_takes_flair(const std::string& cat) {
    return cat == "background" || cat == "materials" || cat == "environment" ||
           cat == "appearance" || cat == "objects";
}

const std::vector<std::string>& city_lines() {
    static const std::vector<std::string> v = {
        "Another slow day in {city}.", "{city} never disappoints.", "Typical afternoon in {city}.",
        "Only in {city}.", "{city} in its best mood."};
    return v;
}

const std::vector<std::string>& preference_stems() {
    static const std::vector<std::string> v = {"prefers",       "favors", "gravitates toward",
                                               "often features", "enjoys", "leans into"};
    return v;
}

std::string fill_slot(std::string pattern, const std::string& key, const std::string& value) {
    auto pos = pattern.find(key);
    if (pos != std::string::npos) pattern.replace(pos, key.size(), value);
    return pattern;
}

// Deterministic affine bijection over the region table so consecutive indices
// land on distinct countries; hashing indices into the table would collide.
std::size_t base_region_index(std::uint64_t i, std::uint64_t seed, std::size_t n) {
    auto gcd = [](std::uint64_t a, std::uint64_t b) {
        while (b != 0) {
            a %= b;
            std::swap(a, b);
        }
        return a;
    };
    std::uint64_t a = mix64(seed ^ salt_str("country-step")) % n;
    a |= 1;
    while (gcd(a, n) != 1) a = (a + 2) % n == 0 ? 1 : (a + 2) % n;
    std::uint64_t b = mix64(seed ^ salt_str("country-offset")) % n;
    return static_cast<std::size_t>((a * (i % n) + b) % n);
}

double override_rate_for(const region_entry& entry,
                         const std::vector<std::pair<std::string, double>>& rates) {
    for (const auto& [key, rate] : rates)
        if (key == entry.country) return rate;
    for (const auto& [key, rate] : rates)
        if (key == entry.region) return rate;
    return 0.0;
}

// Re-roll to an entry in a different region (an override that lands back in
// the same region would defeat its purpose).
std::size_t override_region_index(std::uint64_t i, std::uint64_t seed, std::size_t from) {
    const auto& table = region_table();
    std::vector<std::size_t> candidates;
    candidates.reserve(table.size());
    for (std::size_t j = 0; j < table.size(); ++j)
        if (table[j].region != table[from].region) candidates.push_back(j);
    if (candidates.empty()) return from;
    std::uint64_t h = stable_hash(i, seed ^ salt_str("country-reroll"));
    return candidates[static_cast<std::size_t>(h % candidates.size())];
}

std::vector<std::size_t> largest_remainder_counts(const std::vector<double>& weights,
                                                  std::size_t total) {
    std::vector<std::size_t> counts(weights.size(), 0);
    std::vector<std::pair<double, std::size_t>> fracs;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        double raw = weights[k] * static_cast<double>(total);
        counts[k] = static_cast<std::size_t>(raw);
        assigned += counts[k];
        fracs.emplace_back(raw - static_cast<double>(counts[k]), k);
    }
    std::stable_sort(fracs.begin(), fracs.end(), [&](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        if (weights[x.second] != weights[y.second])
            return weights[x.second] > weights[y.second];
        return x.second < y.second;
    });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned)
        ++counts[fracs[k % fracs.size()].second];
    return counts;
}

} // namespace

persona scaffold_persona(std::uint64_t i, const scaffold_config& cfg,
                         const template_set& templates, const remote::completion_client* llm) {
    validate_scaffold_config(cfg);
    validate_templates(templates, cfg.categories);

    persona p;
    p.id = "user_" + pad_number(i, 6);

    const std::uint64_t hub = seed_index(i, cfg.seed_universe);
    const std::uint64_t base = stable_hash(hub, cfg.rng_seed);

    // demographics
    const auto& table = region_table();
    std::size_t region_idx = base_region_index(i, cfg.rng_seed, table.size());
    if (!cfg.override_rates.empty()) {
        double rate = override_rate_for(table[region_idx], cfg.override_rates);
        if (rate > 0.0) {
            rng flip(mix64(stable_hash(i, cfg.rng_seed ^ salt_str("override"))));
            if (flip.next_double() < rate)
                region_idx = override_region_index(i, cfg.rng_seed, region_idx);
        }
    }
    const region_entry& home = table[region_idx];

    rng demo(mix64(base ^ salt_str("demographics")));
    std::uint64_t age = 18 + demo.next_below(62);
    const char* genders[] = {"female", "male", "non-binary", "unknown"};
    std::uint64_t g = demo.next_below(100);
    std::string gender = genders[g < 42 ? 0 : g < 84 ? 1 : g < 90 ? 2 : 3];
    std::string ethnicity = demo.next_below(100) < 80 ? region_primary_ethnicity(home.region)
                                                      : pick(demo, ethnicity_pool());

    std::size_t n_interests = 5 + static_cast<std::size_t>(demo.next_below(4));
    auto interest_idx = sample_indices(demo, interest_pool().size(), n_interests);
    std::string interests;
    for (std::size_t k = 0; k < interest_idx.size(); ++k)
        interests += (k ? "; " : "") + interest_pool()[interest_idx[k]];

    auto trait_idx = sample_indices(demo, trait_pool().size(), 3);
    std::string traits;
    for (std::size_t k = 0; k < trait_idx.size(); ++k)
        traits += (k ? ", " : "") + trait_pool()[trait_idx[k]];

    p.demographics = {
        {"country", home.country},
        {"city", home.city},
        {"age", std::to_string(age)},
        {"gender", gender},
        {"ethnicity", ethnicity},
        {"occupation", pick(demo, occupations())},
        {"education", pick(demo, education_pool())},
        {"interests", interests},
        {"traits", traits},
        {"tone", pick(demo, tone_pool())},
        {"seed_index", std::to_string(hub)},
        {"face_seed", std::to_string(face_seed(p.id, age))},
    };

    // element library: 12-16 entries per category, adjective x noun combos
    // with regional flair and a couple of city-specific locations
    rng lib(mix64(base ^ salt_str("elements")));
    for (const auto& cat : cfg.categories) {
        auto bank_it = element_banks().find(cat);
        std::vector<std::string> candidates;
        if (bank_it != element_banks().end()) {
            std::vector<std::string> adjectives = bank_it->second.adjectives;
            if (category_takes_flair(cat)) {
                const auto& flair = regional_flair(home.region);
                adjectives.insert(adjectives.end(), flair.begin(), flair.end());
            }
            for (const auto& adj : adjectives)
                for (const auto& noun : bank_it->second.nouns)
                    candidates.push_back(adj + " " + noun);
        } else {
            // configured category without a bank: synthesize neutral entries
            for (int k = 0; k < 20; ++k)
                candidates.push_back(cat + " detail " + std::to_string(k + 1));
        }
        if (cat == "environment") {
            candidates.push_back("streets of " + home.city);
            candidates.push_back("old quarter of " + home.city);
        }
        std::size_t count = 12 + static_cast<std::size_t>(lib.next_below(5));
        auto chosen = sample_indices(lib, candidates.size(), count);
        std::sort(chosen.begin(), chosen.end());
        auto& out = p.elements[cat];
        for (auto idx : chosen) out.push_back(candidates[idx]);
    }

    // preferences: 15-20 stated leanings built from the library itself
    rng pref(mix64(base ^ salt_str("preferences")));
    std::size_t n_prefs = 15 + static_cast<std::size_t>(pref.next_below(6));
    for (std::size_t k = 0; k < n_prefs; ++k) {
        const auto& cat = cfg.categories[pref.next_below(cfg.categories.size())];
        const auto& lib_entries = p.elements.at(cat);
        p.preferences.push_back(pick(pref, preference_stems()) + " " + pick(pref, lib_entries));
    }

    // post history: content mix by largest remainder over the type weights
    const std::vector<std::pair<std::string, double>> type_mix = {
        {"activity", 0.35}, {"appreciation", 0.25}, {"shared_content", 0.25}, {"selfie", 0.15}};
    std::vector<double> weights;
    for (const auto& [type, w] : type_mix) {
        if (templates.type_openers.find(type) == templates.type_openers.end())
            throw error(errc::data, "template missing openers for " + type);
        weights.push_back(w);
    }
    auto type_counts = largest_remainder_counts(weights, cfg.post_count);

    std::vector<std::string> post_types;
    post_types.reserve(cfg.post_count);
    auto remaining = type_counts;
    while (post_types.size() < cfg.post_count) {
        for (std::size_t t = 0; t < remaining.size() && post_types.size() < cfg.post_count; ++t) {
            if (remaining[t] == 0) continue;
            post_types.push_back(type_mix[t].first);
            --remaining[t];
        }
    }

    rng posts_rng(mix64(base ^ salt_str("posts")));
    for (std::size_t n = 0; n < cfg.post_count; ++n) {
        post ps;
        ps.id = "p" + pad_number(n + 1, 2);
        const auto& type = post_types[n];

        std::size_t mentions =
            std::min<std::size_t>(3 + posts_rng.next_below(4), cfg.categories.size());
        auto cat_idx = sample_indices(posts_rng, cfg.categories.size(), mentions);

        std::vector<std::string> phrases;
        for (auto ci : cat_idx) {
            const auto& cat = cfg.categories[ci];
            const auto& lib_entries = p.elements.at(cat);
            const auto& elem = pick(posts_rng, lib_entries);
            ps.element_refs[cat].push_back(elem);
            phrases.push_back(
                fill_slot(pick(posts_rng, templates.category_phrases.at(cat)), "{e}", elem));
        }

        std::string caption = pick(posts_rng, templates.type_openers.at(type));
        for (std::size_t k = 0; k < phrases.size(); ++k) {
            if (k == 0)
                caption += " " + phrases[k];
            else if (k + 1 == phrases.size())
                caption += ", and " + phrases[k];
            else
                caption += ", " + phrases[k];
        }
        caption += ". " + fill_slot(pick(posts_rng, city_lines()), "{city}", home.city);
        caption += " " + pick(posts_rng, templates.closers);
        ps.caption = caption;
        p.posts.push_back(std::move(ps));
    }

    if (llm != nullptr) {
        const std::string instruction =
            "Rewrite this social media caption in a natural first-person voice. Keep every "
            "quoted detail verbatim and do not add new factual details.";
        for (auto& ps : p.posts) {
            std::string rewritten = llm->complete(instruction, ps.caption);
            if (!rewritten.empty()) ps.caption = std::move(rewritten);
        }
    }

    auto report = validate_persona(p, cfg.categories, min_valid_posts);
    if (!report.ok()) {
        std::ostringstream msg;
        msg << "scaffolded persona " << p.id << " failed validation:";
        for (const auto& issue : report.issues) msg << " [" << issue.code << "] " << issue.detail;
        throw error(errc::data, msg.str());
    }
    return p;
}

} // namespace vptt::benchgen
