"""Self-contained demo data: corpus, held-out split, and frequency lexicon.

The environment this package targets is often offline, so the end-to-end
experiments ship with a deterministic generator instead of a downloaded
corpus: a weighted sentence grammar over an embedded English lexicon with
regular+irregular morphology.  Content lemmas carry per-million frequency
scores (high tier 8..600, mid 0.9..6.0, rare 0.05..0.65, drawn
log-uniformly per word from a stable hash) and the grammar samples lemmas
proportionally to those scores, so lexicon bands and corpus exposure agree
the way CELEX scores roughly agree with a natural training corpus.

Everything is reproducible: one seed fixes the corpus bytes, the held-out
split, and the lexicon file.

Swap in a real corpus at any time: the rest of the package only sees plain
text (one utterance per line) and a ``word<TAB>freq-per-million`` TSV.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .stimuli import LexiconEntry

# --------------------------------------------------------------------------
# lemma lists (all real English, lowercase)
# --------------------------------------------------------------------------

NOUNS_COMMON = """
window pillow garden mountain river butter dinner morning evening weather
father mother sister brother doctor teacher farmer painter builder singer
dancer runner keeper hunter sailor soldier worker writer driver baker
animal basket bottle branch breakfast bridge brother bucket butter button
cabbage candle carpet carrot castle cattle cellar chicken children circle
city coffee corner cotton country cousin cradle curtain daughter desert
dollar donkey dragon dress driver eagle engine family farmer feather
finger flower forest fortune fountain garden gravel hammer harbor
harvest heaven hollow honey horse hotel hunger island jacket journey
kettle kitchen ladder lantern leather lemon letter lion lizard lobster
luggage lumber machine magnet mantle marble market meadow meadow melon
member metal middle minute mirror moment money monkey monster motor
muscle music nation nature needle neighbor nephew night number ocean
office onion orange orchard package palace paper parcel pardon parent
pebble pencil people pepper person picture pigeon pillow pirate pistol
planet plaster pocket poison powder power present prison puzzle rabbit
raisin reason ribbon richness riddle riot robin rubber saddle sailor
salad sandal school scissors season second secret set shadow shelter
shoulder shovel signal silver sister soldier spider spirit station
stomach story stranger street student sugar summer supper table tailor
temple thunder ticket tiger timber toast tomato tongue tower town
traffic treasure trouble trumpet tunnel turkey turtle uncle valley
village visitor wagon waiter wallet walnut water weapon weather wedding
welcome window winter wisdom woman wonder wood yard yellowbird zero
apple baby ball bank bath bed bell bird boat body book box boy bread
cake car cat chair child clock cloud coat corn cup day dog door dream
dust ear earth egg eye face farm fire fish floor food foot fork game
gate girl glass goat gold grass hand hat head heart hill home hook
horn house ice key king kiss knee knife lady lake lamp land leaf leg
life light line lip list lock log man map mat meat milk mind moon
mouse mouth nail name neck nest net nose note nut oil pan park part
path pen pig pin place plan plant plate pond pool post pot rain rat
ring road rock roof room root rope rose salt sand sea seat sheep shell
ship shirt shoe shop side sign silk sky snake snow sock son song soup
spoon spot star stick stone store storm sun tail tea team tent thing
time tool tooth top toy train tree truck wall watch wave way week well
wheel wife wind wine wing wolf word work world year
""".split()

NOUNS_COMMON_2 = """
teacher doctor farmer sailor hunter runner singer dancer painter
airplane airport anchor ankle apron arrow artist autumn avenue
bacon badge balloon banana banner barrel basement battle beach
beard bedroom beetle belly berry bicycle blanket blossom bonnet
border bottom boulder bow bowl brain brick broom bubble buffalo
bundle burrow bushes butcher cabin camel camera canal candy
cannon canoe canyon captain carriage cartoon carver ceiling
chamber channel chapter charcoal chariot checker cheek cheese
cherry chest chimney chin chocolate cinder clay cliff closet
cloth coach coal coast cobweb cocoa coconut collar colt column
comet compass contest copper coral cork costume cough course
crab crane crayon cream creek crew cricket crow crowd crown
crumb crust crystal cupboard current cushion dairy daisy deck
deer dentist desk devil diamond dirt ditch dock dolphin dough
dozen drain drawer drum duck dusk eagle elbow elephant engine
eraser fabric falcon fairy feast fence fern ferry fever field
fiddle fig film fin flag flake flame flask fleet flint flock
flour flute foam fog forehead fossil fowl fox frame freckle
fridge frog frost fruit fuel funnel fur galaxy gallon gallop
gang garage gear giant ginger giraffe glacier globe glove glue
goose gown grain grape gravy griddle grove guard guest guide
guitar gull hail hall hallway hammock hamster handle hawk hay
hazel hedge heel helmet hen herd hero heron hide hinge hip hive
hood hoof hoop horizon hornet hound hour hut icicle inch infant
inn insect iron ivory ivy jar jaw jelly jewel judge jungle kennel
kite kitten knight knob knot label lace lamb lawn lawyer lead
ledge lens leopard lever lid lily
""".split()

NOUNS_ABSTRACT = """
question answer lesson problem minute moment history mystery memory
story victory journey country company moment nature picture future
feeling meaning morning warning greeting meeting building painting
beginning ending opening evening happiness darkness kindness sadness
weakness illness business madness movement moment agreement argument
payment statement treatment judgment measurement government adventure
creature culture departure furniture mixture pleasure pressure signature
temperature attention station action collection question direction
education information invention position condition decision division
occasion religion opinion region season reason prison poison passion
fashion mission village courage message passage voyage language bandage
cabbage luggage marriage garbage cottage postage sausage bondage
lime linen lumberjack magic mail mane manger maple marsh mask
mast match mattress meal medal melody merchant mermaid mess
miller mineral mist mitten mixer moat mole morsel moss moth
motion mud muffin mule mumble mushroom mustard mutton muzzle
oar oat oatmeal olive omelet orbit organ ostrich otter oven owl
ox oyster paddle pageant pail palm pancake panda panther parade
parlor parrot paste pastry pasture patch pattern pavement paw
peach peacock peanut pear pearl peasant pedal penguin penny
petal pewter phone piano pickle picnic pine pineapple pint
pitcher plain plank platform plum plumber plume pole pony
porch porridge portrait potato pouch poultry pound prince
princess pudding pump pumpkin pupil puppet puppy purse quarry
quart quarter queen quill quilt quiver raccoon rack radio raft
rail railway rake ranch rascal raven recipe reef rein reptile
ribbon rice rifle rind ripple roast robe rooster rug ruin ruler
rust rye sack sail sap sapling satin saucer sawdust scale scarf
scene scent schooner scoop scout scrap screen seed seesaw serpent
shade shark shawl shed shepherd sheriff shield shingle shore
shrub shutter sidewalk siren skate sketch ski skillet skirt
skunk slate sled sleeve slipper slope smoke snail sofa soap
sole sparrow spear sphere spice spinach spool spout spring
sprout spur squash squirrel stable stack stadium stair stalk
stall stamp staple statue steam steel steeple stem stew stitch
stool stove strap straw stream stripe stump suit sunset surface
swamp swan sweater swing sword syrup tablet tackle tadpole tank
tar tart tassel tavern tax thicket thorn thread throne thumb
tide tile tin toad toe token tomb torch trail trap tray
tribe trick trough trout trunk tub tube tulip tutor twig twine
udder umbrella unicorn vase vault veil vein vendor verse vessel
vest villain vine vinegar violet violin vulture waist walrus
wand warden wart wasp web whale wharf wheat whistle wick widow
willow wire witch wizard wren wrist zebra zone
""".split()

NOUNS_RARE = """
thicket bramble gully cistern ledger gable spindle trellis mortar
pestle gosling fledgling thimble bobbin gusset hemline placket bodice
garret parlor scullery pantry dormer lintel rafter joist girder
culvert sluice weir millpond towpath stile paddock byre fallow furrow
harrow sickle scythe flail winnow gleaner thresher haywain hayrick
gorse heather bracken sedge rushes osier willowherb foxglove cowslip
primrose campion yarrow tansy mallow teasel burdock nettle thistle
clover vetch sorrel chicory endive marjoram borage lovage fennel
caraway chervil parsnip turnip rutabaga kohlrabi chard salsify
gooseberry currant damson quince medlar loquat persimmon mulberry
bilberry cloudberry rosehip sloe crabapple cobnut filbert acorn
catkin lichen sphagnum toadstool puffball stinkhorn morel
chanterelle truffle bracket polecat stoat weasel dormouse shrew vole
badger otter marten wildcat lynx osprey kestrel merlin harrier
buzzard shrike wagtail dunnock siskin redpoll linnet brambling
fieldfare redwing ouzel wheatear whinchat stonechat pipit skylark
nightjar corncrake bittern curlew godwit dunlin sanderling turnstone
plover lapwing avocet shelduck teal wigeon pochard goldeneye
goosander cormorant gannet fulmar guillemot razorbill puffin
kittiwake tern skua petrel shearwater grebe loon smew garganey
pintail gadwall mandrel gimlet adze billhook hatchet maul
wedge mallet rasp spokeshave drawknife auger chisel gouge burin
graver scriber caliper divider plumbline trowel mattock dibble
sieve colander skillet trivet spigot bung stave hoop cask
firkin hogshead demijohn carboy flagon ewer goblet tankard noggin
porringer trencher salver tureen ramekin skimmer dredger
muslin calico gingham chintz damask brocade taffeta organza tulle
velvet corduroy worsted tweed herringbone paisley jacquard chenille
moleskin buckram hessian burlap oakum jute sisal raffia rattan wicker
besom kindling tinder taper rushlight
snuffer sconce cresset flambeau brazier inglenook dresser
chiffonier escritoire davenport ottoman hassock footstool
banquette armoire commode washstand basin pitcher jug urn
cauldron crock pipkin stewpan griddle bakestone paddle
churn dasher piggin midden byway bridleway
holloway greenway causeway berm verge swale copse spinney
covert dingle dell combe tarn mere lough fen mire moss
heath moor wold scarp brae glen strath corrie scree talus
moraine esker drumlin kame kettlehole doline
""".split()

VERBS_COMMON = """
walk talk jump play work look help call move stop start open close
clean wash cook bake read write learn teach study listen watch follow
carry bring take make give get find keep hold stand sit run eat drink
sleep wake dream think know say tell ask answer wait stay leave come
go see hear feel touch smell taste like love hate want need try use
show turn pull push lift drop throw catch kick hit cut break fix
build paint draw sing dance laugh cry smile shout whisper remember
forget believe hope wish plan visit travel return arrive happen
change grow plant water pick gather collect count measure weigh
borrow lend spend save buy sell pay cost wear dress button zip
hang fold wrap pack unpack fill empty pour spill mix stir boil fry
freeze melt burn light blow brush comb shave bathe rest relax
wonder notice point wave knock ring climb crawl swim float sail
drive ride fly land slip slide fall roll bounce shake tremble
agree argue decide explain describe discuss mention promise refuse
accept invite welcome thank greet meet join share divide compare
complete continue finish begin practice prepare protect punish
repair replace report respect rescue search serve settle suffer
suggest suppose surprise surround trust obey offer order own
""".split()

VERBS_RARE = """
saunter trudge rummage beckon linger loiter meander amble scamper
scurry trundle shamble lumber hobble totter stagger lurch careen
gambol frolic caper prance sidle slink skulk prowl lurk creep
mosey traipse gallivant perambulate peregrinate waft drift wend
burrow nestle roost perch alight swoop wheel hover flit flutter
glide soar plummet dive plunge wallow bask graze browse forage
scavenge hoard cache stash pilfer filch purloin abscond decamp
absquatulate vamoose skedaddle bolt flee evade elude dodge parry
feint grapple wrestle tussle scuffle squabble bicker quibble
haggle barter dicker peddle hawk vend proffer tender bequeath
bestow endow impart confer divulge disclose intimate insinuate
allude aver opine attest vouch affirm declaim orate pontificate
expound elucidate explicate adumbrate delineate limn etch engrave
emboss chisel whittle carve hew cleave rive split splinter shatter
pulverize grind mill thresh winnow glean reap mow scythe rake
hoe till plow harrow sow broadcast transplant prune graft espalier
""".split()

ADJECTIVES_COMMON = """
little big small large great good bad old new young long short tall
high low wide narrow thick thin heavy light fast slow quick early
late hot cold warm cool wet dry clean dirty empty full open closed
hard soft loud quiet bright dark deep shallow strong weak rich poor
happy sad angry calm brave afraid proud shy kind cruel gentle rough
smooth sharp dull sweet sour bitter salty fresh stale ripe rotten
pretty ugly handsome plain fancy simple easy hard difficult possible
careful careless useful useless helpful harmful hopeful hopeless
cheerful gloomy friendly lonely lovely lively sleepy hungry thirsty
tired busy lazy ready early silly wise clever stupid funny serious
strange familiar common rare special normal whole broken perfect
golden silver wooden woolen silken leather yellow orange purple
green blue red white black brown pink gray silent noisy crowded
foolish selfish childish greedy jealous patient honest polite rude
famous secret certain curious nervous anxious eager gentle tender
bitter pleasant distant ancient modern sudden steady gradual frequent
""".split()

ADJECTIVES_RARE = """
gossamer diaphanous gauzy filmy wispy sylphlike willowy lissome
lithe limber supple sinewy wiry brawny burly strapping stalwart
sturdy stocky squat dumpy pudgy portly rotund corpulent gaunt
haggard wizened gnarled knotty knobbly warty scabrous scurfy
mangy threadbare tattered frayed moth-eaten shabby dowdy frumpy
natty dapper spruce jaunty rakish raffish louche seedy squalid
grimy grubby dingy drab dreary dismal bleak stark austere spartan
frugal parsimonious penurious impecunious destitute opulent lavish
sumptuous palatial baronial stately august venerable hoary antique
archaic quaint rustic bucolic pastoral sylvan verdant lush rank
fecund fallow arid parched sere withered blighted cankered mildewed
musty fusty frowsty dank clammy sodden soggy squelchy boggy miry
fenny marshy brackish briny saline limpid pellucid turbid murky
roiled silty chalky loamy friable crumbly powdery gritty shingly
pebbly stony craggy rugged scarped sheer beetling overhanging
""".split()

ADVERBS = """
quickly slowly quietly loudly carefully suddenly happily sadly
gently easily nearly almost really quite rather very too again
always never often sometimes usually rarely seldom once twice
together alone away back down up out inside outside everywhere
somewhere nowhere yesterday today tomorrow tonight soon later
early late now then here there far near
""".split()

NAMES = """
anna ben clara david emma felix grace henry ivy jack karen leo
mary noah olive peter quinn rosa sam tilly victor wendy alice
thomas martha george lucy arthur nora edwin flora hugo irene
""".split()

# irregular morphology -------------------------------------------------------

IRREGULAR_PLURALS = {
    "child": "children", "man": "men", "woman": "women", "foot": "feet",
    "tooth": "teeth", "mouse": "mice", "person": "people", "sheep": "sheep",
    "knife": "knives", "wife": "wives", "life": "lives", "leaf": "leaves",
    "wolf": "wolves", "shelf": "shelves", "loaf": "loaves", "scissors": "scissors",
}

IRREGULAR_VERBS = {
    "take": ("takes", "took", "taking"), "make": ("makes", "made", "making"),
    "give": ("gives", "gave", "giving"), "get": ("gets", "got", "getting"),
    "find": ("finds", "found", "finding"), "keep": ("keeps", "kept", "keeping"),
    "hold": ("holds", "held", "holding"), "stand": ("stands", "stood", "standing"),
    "sit": ("sits", "sat", "sitting"), "run": ("runs", "ran", "running"),
    "eat": ("eats", "ate", "eating"), "drink": ("drinks", "drank", "drinking"),
    "sleep": ("sleeps", "slept", "sleeping"), "wake": ("wakes", "woke", "waking"),
    "dream": ("dreams", "dreamt", "dreaming"), "think": ("thinks", "thought", "thinking"),
    "know": ("knows", "knew", "knowing"), "say": ("says", "said", "saying"),
    "tell": ("tells", "told", "telling"), "come": ("comes", "came", "coming"),
    "go": ("goes", "went", "going"), "see": ("sees", "saw", "seeing"),
    "hear": ("hears", "heard", "hearing"), "feel": ("feels", "felt", "feeling"),
    "bring": ("brings", "brought", "bringing"), "buy": ("buys", "bought", "buying"),
    "sell": ("sells", "sold", "selling"), "pay": ("pays", "paid", "paying"),
    "cost": ("costs", "cost", "costing"), "wear": ("wears", "wore", "wearing"),
    "hang": ("hangs", "hung", "hanging"), "freeze": ("freezes", "froze", "freezing"),
    "blow": ("blows", "blew", "blowing"), "draw": ("draws", "drew", "drawing"),
    "sing": ("sings", "sang", "singing"), "swim": ("swims", "swam", "swimming"),
    "fly": ("flies", "flew", "flying"), "drive": ("drives", "drove", "driving"),
    "ride": ("rides", "rode", "riding"), "fall": ("falls", "fell", "falling"),
    "break": ("breaks", "broke", "breaking"), "cut": ("cuts", "cut", "cutting"),
    "hit": ("hits", "hit", "hitting"), "throw": ("throws", "threw", "throwing"),
    "catch": ("catches", "caught", "catching"), "read": ("reads", "read", "reading"),
    "write": ("writes", "wrote", "writing"), "teach": ("teaches", "taught", "teaching"),
    "learn": ("learns", "learnt", "learning"), "leave": ("leaves", "left", "leaving"),
    "meet": ("meets", "met", "meeting"), "lend": ("lends", "lent", "lending"),
    "spend": ("spends", "spent", "spending"), "build": ("builds", "built", "building"),
    "grow": ("grows", "grew", "growing"), "begin": ("begins", "began", "beginning"),
    "forget": ("forgets", "forgot", "forgetting"), "cleave": ("cleaves", "cleft", "cleaving"),
    "flee": ("flees", "fled", "fleeing"), "mow": ("mows", "mowed", "mowing"),
    "sow": ("sows", "sowed", "sowing"), "hew": ("hews", "hewed", "hewing"),
}

_VOWELS = set("aeiou")


def plural_of(noun: str) -> str:
    if noun in IRREGULAR_PLURALS:
        return IRREGULAR_PLURALS[noun]
    if noun.endswith(("s", "x", "z", "ch", "sh")):
        return noun + "es"
    if noun.endswith("y") and len(noun) > 1 and noun[-2] not in _VOWELS:
        return noun[:-1] + "ies"
    return noun + "s"


def _doubles_final(base: str) -> bool:
    # short CVC stems double the final consonant (stop -> stopped)
    if len(base) < 3:
        return False
    a, b, c = base[-3], base[-2], base[-1]
    if c in _VOWELS or c in "wxy":
        return False
    if b not in _VOWELS or a in _VOWELS:
        return False
    return sum(ch in _VOWELS for ch in base) == 1


def verb_forms(base: str) -> tuple[str, str, str]:
    """(3rd-singular, past, -ing)."""
    if base in IRREGULAR_VERBS:
        return IRREGULAR_VERBS[base]
    third = plural_of(base)
    if base.endswith("e") and not base.endswith("ee"):
        past = base + "d"
        ing = base[:-1] + "ing"
    elif base.endswith("y") and len(base) > 1 and base[-2] not in _VOWELS:
        past = base[:-1] + "ied"
        ing = base + "ing"
    elif _doubles_final(base):
        past = base + base[-1] + "ed"
        ing = base + base[-1] + "ing"
    else:
        past = base + "ed"
        ing = base + "ing"
    return third, past, ing


_NO_LY = frozenset(
    """afraid golden silver wooden woolen silken leather yellow orange
    purple green white black brown pink gray whole rotten ripe stale
    broken little plain fancy""".split()
)


def adverb_of(adj: str) -> str | None:
    if adj.endswith("ly") or len(adj) < 4 or not adj.isalpha() or adj in _NO_LY:
        return None
    if adj.endswith("y") and adj[-2] not in _VOWELS:
        return adj[:-1] + "ily"
    if adj.endswith("le") and adj[-3] not in _VOWELS:
        return adj[:-1] + "y"
    return adj + "ly"


# frequency tiers ------------------------------------------------------------

HIGH_RANGE = (8.0, 600.0)
MID_RANGE = (0.9, 6.0)
RARE_RANGE = (0.05, 0.65)

FUNCTION_WORDS = {
    "the": 60000, "a": 22000, "an": 3500, "and": 27000, "of": 30000,
    "to": 26000, "in": 18000, "on": 7300, "at": 5300, "by": 5100,
    "with": 6600, "from": 4300, "for": 8800, "about": 1900, "over": 1300,
    "under": 560, "near": 330, "behind": 240, "beside": 85, "between": 730,
    "through": 830, "across": 270, "around": 460, "after": 1500,
    "before": 1000, "during": 570, "against": 450, "along": 350,
    "inside": 160, "outside": 210, "toward": 170, "upon": 560, "within": 460,
    "i": 21000, "you": 13500, "he": 9600, "she": 5600, "it": 10600,
    "we": 7200, "they": 6300, "me": 2900, "him": 2600, "her": 3600,
    "us": 1100, "them": 2200, "my": 3300, "your": 2300, "his": 6300,
    "its": 1900, "our": 1500, "their": 2600, "this": 4600, "that": 10700,
    "these": 1600, "those": 1000, "some": 1700, "any": 1200, "every": 440,
    "each": 770, "no": 2200, "all": 3000, "many": 920, "two": 1400,
    "three": 690, "one": 3200, "is": 10000, "are": 4700, "was": 9600,
    "were": 3300, "be": 6500, "been": 2500, "being": 970, "do": 2800,
    "does": 480, "did": 1300, "have": 4700, "has": 2400, "had": 5100,
    "will": 2700, "would": 2700, "can": 1700, "could": 1600, "may": 1300,
    "might": 660, "must": 1000, "shall": 370, "should": 1100, "not": 4600,
    "very": 1300, "too": 920, "also": 1100, "just": 1300, "still": 760,
    "then": 1500, "there": 2700, "here": 930, "now": 1400, "never": 700,
    "always": 570, "often": 370, "soon": 240, "again": 680, "maybe": 230,
    "perhaps": 310, "yes": 510, "well": 1100, "oh": 880, "what": 2400,
    "who": 2300, "where": 940, "why": 520, "how": 1500, "which": 3600,
    "when": 2300, "while": 680, "if": 2600, "because": 880, "so": 2000,
    "but": 4600, "or": 4100, "as": 7400, "said": 2400, "think": 540,
}


def _tier_score(word: str, lo: float, hi: float) -> float:
    """Log-uniform score in [lo, hi], stable per word."""
    digest = hashlib.sha256(("freq:" + word).encode()).digest()
    u = int.from_bytes(digest[:8], "little") / 2**64
    return math.exp(math.log(lo) + u * (math.log(hi) - math.log(lo)))


@dataclass
class _Lemma:
    word: str
    pos: str  # noun | verb | adj | adv
    score: float


def _dedup(words: list[str]) -> list[str]:
    seen = set()
    out = []
    for w in words:
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


_LEMMA_CACHE: list[_Lemma] | None = None


def _lemmas() -> list[_Lemma]:
    global _LEMMA_CACHE
    if _LEMMA_CACHE is not None:
        return _LEMMA_CACHE
    lemmas: list[_Lemma] = []
    claimed: set[str] = set()

    def add(words: list[str], pos: str, rng: tuple[float, float]) -> None:
        for w in _dedup(words):
            if w in claimed or w in FUNCTION_WORDS:
                continue
            claimed.add(w)
            lemmas.append(_Lemma(w, pos, _tier_score(w, *rng)))

    add(NOUNS_COMMON + NOUNS_COMMON_2 + NOUNS_ABSTRACT, "noun", HIGH_RANGE)
    add(VERBS_COMMON, "verb", HIGH_RANGE)
    add(ADJECTIVES_COMMON, "adj", HIGH_RANGE)
    add(ADVERBS, "adv", HIGH_RANGE)
    add(NOUNS_RARE, "noun", RARE_RANGE)
    add(VERBS_RARE, "verb", RARE_RANGE)
    add(ADJECTIVES_RARE, "adj", RARE_RANGE)
    _LEMMA_CACHE = lemmas
    return lemmas


def _forms_of(lemma: _Lemma) -> list[tuple[str, str, float]]:
    """(form-kind, surface form, per-million score)."""
    out = []
    if lemma.pos == "noun":
        out.append(("sg", lemma.word, lemma.score))
        out.append(("pl", plural_of(lemma.word), lemma.score * 0.45))
    elif lemma.pos == "verb":
        third, past, ing = verb_forms(lemma.word)
        out.append(("base", lemma.word, lemma.score * 0.45))
        out.append(("3sg", third, lemma.score * 0.3))
        out.append(("past", past, lemma.score * 0.5))
        out.append(("ing", ing, lemma.score * 0.35))
    elif lemma.pos == "adj":
        out.append(("base", lemma.word, lemma.score))
        # -ly derivation only for the common tier; rare-tier coinages get odd
        ly = adverb_of(lemma.word) if lemma.score > 1.0 else None
        if ly:
            out.append(("ly", ly, lemma.score * 0.3))
    else:
        out.append(("base", lemma.word, lemma.score))
    return out


def demo_lexicon() -> list[LexiconEntry]:
    """Every surface form with its per-million score, plus function words.
    Homographs keep the higher score."""
    scores: dict[str, float] = dict(FUNCTION_WORDS)
    for lemma in _lemmas():
        for _, form, score in _forms_of(lemma):
            if form not in scores or scores[form] < score:
                scores[form] = score
    return [LexiconEntry(w, round(s, 4)) for w, s in sorted(scores.items())]


def write_lexicon_tsv(path: str | Path, entries: list[LexiconEntry] | None = None) -> None:
    entries = entries if entries is not None else demo_lexicon()
    lines = [f"{e.word}\t{e.freq_per_million}" for e in entries]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# sentence grammar
# --------------------------------------------------------------------------

class _Sampler:
    """Weighted lemma sampling per part of speech."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.pools: dict[str, tuple[list[_Lemma], np.ndarray]] = {}
        for pos in ("noun", "verb", "adj", "adv"):
            pool = [l for l in _lemmas() if l.pos == pos]
            weights = np.array([l.score for l in pool], dtype=np.float64)
            cumulative = np.cumsum(weights / weights.sum())
            self.pools[pos] = (pool, cumulative)

    def lemma(self, pos: str) -> _Lemma:
        pool, cumulative = self.pools[pos]
        u = self.rng.random()
        return pool[int(np.searchsorted(cumulative, u))]

    def pick(self, options) -> str:
        return options[int(self.rng.integers(len(options)))]


SG_DETS = ["the", "the", "the", "a", "a", "this", "that", "his", "her", "my", "your", "their", "our", "every"]
PL_DETS = ["the", "the", "these", "those", "some", "many", "his", "her", "my", "their", "our", "two", "three", "all"]
SUBJ_PRONOUNS = ["i", "you", "he", "she", "it", "we", "they"]
OBJ_PRONOUNS = ["me", "you", "him", "her", "it", "us", "them"]
PREPOSITIONS = [
    "in", "on", "at", "by", "with", "from", "near", "behind", "beside",
    "under", "over", "through", "across", "around", "inside", "outside",
]
CONJUNCTIONS = ["and", "but", "so", "because", "while", "when"]
INTERJECTIONS = ["oh", "well", "yes", "no", "look", "listen"]
CONTRACTIONS = ["don't", "it's", "i'm", "that's", "there's", "can't", "didn't", "isn't", "we're", "you're", "i've", "let's"]
MODALS = ["will", "can", "could", "would", "may", "might", "must", "should"]


def _np_phrase(s: _Sampler) -> tuple[list[str], str]:
    """Returns (tokens, number) where number is 'sg', 'pl', or 'pron-<w>'."""
    roll = s.rng.random()
    if roll < 0.08:
        pron = s.pick(SUBJ_PRONOUNS)
        return [pron], f"pron-{pron}"
    if roll < 0.15:
        return [s.pick(NAMES).capitalize()], "sg"
    plural = s.rng.random() < 0.3
    noun = s.lemma("noun")
    form = plural_of(noun.word) if plural else noun.word
    det = s.pick(PL_DETS if plural else SG_DETS)
    tokens = [det]
    if s.rng.random() < 0.3:
        tokens.append(s.lemma("adj").word)
    tokens.append(form)
    return tokens, ("pl" if plural else "sg")


def _object_phrase(s: _Sampler) -> list[str]:
    if s.rng.random() < 0.07:
        return [s.pick(OBJ_PRONOUNS)]
    tokens, _ = _np_phrase(s)
    return tokens if tokens[0] not in SUBJ_PRONOUNS else [s.pick(OBJ_PRONOUNS)]


def _pp(s: _Sampler) -> list[str]:
    tokens, _ = _np_phrase(s)
    if tokens[0] in SUBJ_PRONOUNS:
        tokens = [s.pick(OBJ_PRONOUNS)]
    return [s.pick(PREPOSITIONS)] + tokens


def _verb(s: _Sampler, number: str, tense: str) -> list[str]:
    lemma = s.lemma("verb")
    third, past, ing = verb_forms(lemma.word)
    if tense == "modal":
        return [s.pick(MODALS), lemma.word]
    if tense == "past":
        return [past]
    if number == "sg" or number in ("pron-he", "pron-she", "pron-it"):
        return [third]
    return [lemma.word]


def _simple_clause(s: _Sampler) -> list[str]:
    subject, number = _np_phrase(s)
    tense = s.pick(["past", "past", "present", "present", "modal"])
    tokens = subject + _verb(s, number, tense)
    roll = s.rng.random()
    if roll < 0.55:
        tokens += _object_phrase(s)
    if s.rng.random() < 0.3:
        tokens += _pp(s)
    if s.rng.random() < 0.22:
        tokens.append(s.lemma("adv").word)
    return tokens


def _sentence_tokens(s: _Sampler) -> tuple[list[str], str]:
    """Returns (tokens, final punctuation)."""
    roll = s.rng.random()
    if roll < 0.50:
        return _simple_clause(s), "."
    if roll < 0.62:
        first = _simple_clause(s)
        second = _simple_clause(s)
        joiner = s.pick(CONJUNCTIONS)
        comma = [","] if s.rng.random() < 0.5 else []
        return first + comma + [joiner] + second, "."
    if roll < 0.70:
        subject, number = _np_phrase(s)
        if number == "pron-i":
            be = "am"
        elif number in ("pl", "pron-you", "pron-we", "pron-they"):
            be = "are"
        else:
            be = "is"
        return subject + [be, s.lemma("adj").word], "."
    if roll < 0.76:
        obj, _ = _np_phrase(s)
        if obj[0] in SUBJ_PRONOUNS:
            obj = ["the", s.lemma("noun").word]
        return ["there", "is"] + obj + _pp(s), "."
    if roll < 0.82:
        pron = s.pick(["you", "we", "they", "he", "she"])
        aux = "does" if pron in ("he", "she") else "do"
        lemma = s.lemma("verb")
        return [aux, pron, lemma.word] + _object_phrase(s), "?"
    if roll < 0.87:
        wh = s.pick(["what", "where", "why", "when", "how"])
        subject, _ = _np_phrase(s)
        if subject[0] in SUBJ_PRONOUNS:
            subject = ["the", s.lemma("noun").word]
        return [wh, "did"] + subject + [s.lemma("verb").word], "?"
    if roll < 0.92:
        subject, number = _np_phrase(s)
        tokens = subject + ["did", "not", s.lemma("verb").word] + _object_phrase(s)
        return tokens, "."
    if roll < 0.96:
        tokens = [s.pick(INTERJECTIONS), ","] + _simple_clause(s)
        return tokens, "!"
    return _contraction_clause(s), "."


def _contraction_clause(s: _Sampler) -> list[str]:
    kind = s.pick(CONTRACTIONS)
    if kind in ("it's", "that's", "i'm"):
        return [kind, s.lemma("adj").word]
    if kind == "there's":
        return [kind, "a", s.lemma("noun").word] + _pp(s)
    if kind in ("we're", "you're"):
        return [kind, verb_forms(s.lemma("verb").word)[2], s.pick(OBJ_PRONOUNS)]
    if kind == "i've":
        return [kind, "got", "a", s.lemma("noun").word]
    if kind == "let's":
        return [kind, s.lemma("verb").word] + _object_phrase(s)
    # don't / can't / didn't / isn't
    if kind == "isn't":
        return ["it", kind, s.lemma("adj").word]
    return ["i", kind, s.lemma("verb").word] + _object_phrase(s)


def render_sentence(s: _Sampler) -> str:
    tokens, punct = _sentence_tokens(s)
    words: list[str] = []
    for tok in tokens:
        if tok == ",":
            if words:
                words[-1] += ","
            continue
        words.append(tok)
    if not words:
        words = ["well"]
    first = words[0]
    words[0] = first[0].upper() + first[1:]
    return " ".join(words) + punct


@dataclass
class DemoData:
    corpus_path: Path
    held_out_path: Path
    lexicon_path: Path
    n_words: int
    n_sentences: int


def build_demo_data(
    out_dir: str | Path,
    n_words: int = 2_050_000,
    seed: int = 0,
    held_out_fraction: float = 0.02,
) -> DemoData:
    """Write corpus.txt (one sentence per line), held_out.txt, lexicon.tsv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    sampler = _Sampler(rng)
    sentences: list[str] = []
    total = 0
    while total < n_words:
        sentence = render_sentence(sampler)
        sentences.append(sentence)
        total += len(sentence.split())
    split = int(len(sentences) * (1.0 - held_out_fraction))
    corpus_path = out_dir / "corpus.txt"
    held_out_path = out_dir / "held_out.txt"
    lexicon_path = out_dir / "lexicon.tsv"
    corpus_path.write_text("\n".join(sentences[:split]) + "\n", encoding="utf-8")
    held_out_path.write_text("\n".join(sentences[split:]) + "\n", encoding="utf-8")
    write_lexicon_tsv(lexicon_path)
    return DemoData(
        corpus_path=corpus_path,
        held_out_path=held_out_path,
        lexicon_path=lexicon_path,
        n_words=total,
        n_sentences=len(sentences),
    )
