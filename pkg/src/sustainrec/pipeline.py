"""Batch pipeline: ingest, topics, SUSTAIN training, recommendation, evaluation.

Every stage writes its artifacts into the output directory together with a
cache key derived from its own settings and the keys of the stages it reads
from. A rerun with an unchanged key reuses the artifacts instead of
recomputing them.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

from . import baselines, corpus, evaluation, hybrid, neighbors, ranking, sustain, topics, wrmf

_log = logging.getLogger(__name__)

ALGORITHMS = ("MP", "CF_R", "CB_T", "WRMF", "CF_U", "SUSTAIN+CF_U")
STAGES = ("ingest", "topics", "train-sustain", "recommend", "evaluate")

# offsets added to the global seed for each stochastic stage
SEED_SAMPLE = 1
SEED_LDA = 2
SEED_WRMF = 3

FAILURE_MARKER = "FAILED"


@dataclass
class RunConfig:
    dataset: str = ""
    format: str = corpus.FORMAT_TAS
    filter_unique: bool = True
    sample_fraction: float = 1.0
    sample_before_filter: bool = False
    test_fraction: float = 0.2
    topics_path: str = ""
    lda_topics: int = topics.DEFAULT_TOPICS
    lda_iterations: int = topics.DEFAULT_ITERATIONS
    lda_cutoff: float = topics.DEFAULT_CUTOFF
    lda_alpha: float = 0.0
    lda_beta: float = topics.DEFAULT_BETA
    lda_train_only: bool = False
    sustain_r: float = 9.998
    sustain_beta: float = 6.396
    sustain_eta: float = 0.096
    sustain_tau: float = 0.5
    sustain_seed_first: bool = True
    cf_user_k: int = neighbors.DEFAULT_NEIGHBORS
    cf_resource_k: int = neighbors.DEFAULT_NEIGHBORS
    wrmf_factors: int = wrmf.DEFAULT_FACTORS
    wrmf_iterations: int = wrmf.DEFAULT_ITERATIONS
    wrmf_reg: float = wrmf.DEFAULT_REG
    wrmf_conf_alpha: float = wrmf.DEFAULT_CONF_ALPHA
    hybrid_alpha: float = 0.5
    hybrid_candidates: int = neighbors.DEFAULT_CANDIDATES
    hybrid_normalize: bool = True
    k: int = 20
    algorithms: str = ",".join(ALGORITHMS)
    output: str = "out"
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.format not in corpus.FORMATS:
            raise ValueError(f"format must be one of {corpus.FORMATS}")
        if not 0 < self.sample_fraction <= 1:
            raise ValueError("sample_fraction must be in (0, 1]")
        if not 0 < self.test_fraction < 1:
            raise ValueError("test_fraction must be in (0, 1)")
        if self.lda_topics < 1 or self.lda_iterations < 1:
            raise ValueError("lda_topics and lda_iterations must be >= 1")
        if self.lda_cutoff < 0 or self.lda_alpha < 0 or self.lda_beta <= 0:
            raise ValueError("lda_cutoff, lda_alpha must be >= 0 and lda_beta > 0")
        self.sustain_params()
        if self.cf_user_k < 1 or self.cf_resource_k < 1:
            raise ValueError("neighborhood sizes must be >= 1")
        if self.wrmf_factors < 1 or self.wrmf_iterations < 1 or self.wrmf_reg <= 0:
            raise ValueError("wrmf_factors, wrmf_iterations must be >= 1 and wrmf_reg > 0")
        self.hybrid_config()
        unknown = set(self.algorithm_list()) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {', '.join(sorted(unknown))}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def algorithm_list(self) -> list[str]:
        return [a.strip() for a in self.algorithms.split(",") if a.strip()]

    def sustain_params(self) -> sustain.SustainParams:
        return sustain.SustainParams(self.sustain_r, self.sustain_beta, self.sustain_eta,
                                     self.sustain_tau)

    def hybrid_config(self) -> hybrid.HybridConfig:
        return hybrid.HybridConfig(self.hybrid_alpha, self.hybrid_candidates, self.k,
                                   self.cf_user_k, self.hybrid_normalize)

    def to_text(self) -> str:
        lines = [f"{f.name} = {_format_value(getattr(self, f.name))}" for f in fields(self)]
        return "\n".join(lines) + "\n"

    def save(self, path):
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path, **overrides) -> RunConfig:
        values = parse_config_text(Path(path).read_text(encoding="utf-8"))
        values.update(overrides)
        return cls(**values)


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def coerce(name: str, raw: str):
    """Convert a textual config value to the type of field ``name``."""
    kind = _FIELD_TYPES[name]
    raw = raw.strip()
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: not a boolean: {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ValueError(f"config line {lineno}: expected key = value")
        if key not in _FIELD_TYPES:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        values[key] = coerce(key, raw)
    return values


class StageError(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


def _file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _key(*parts) -> str:
    return hashlib.sha256(json.dumps(parts, sort_keys=True).encode()).hexdigest()[:16]


# per-user work shipped to forked workers through module state
_WORKER_STATE: dict = {}


def _pmap(func, items, workers):
    if workers <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * workers))))


def _train_one(user):
    st = _WORKER_STATE
    posts = st["train"].users[user]
    inputs = st["topics"].vectors([p.resource_id for p in posts])
    return sustain.train_user(list(inputs), st["params"], seed_first=st["seed_first"])


def _recommend_one(user):
    st = _WORKER_STATE
    return st["recommender"](user)


class Pipeline:
    """Runs stages against one output directory; see :func:`run_pipeline`."""

    def __init__(self, config: RunConfig):
        config.validate()
        self.config = config
        self.out = Path(config.output)
        self.cache_dir = self.out / ".cache"
        self.executed: list[str] = []
        self.reports: list[evaluation.MetricsReport] = []
        self._keys: dict[str, str] = {}
        self._split = None
        self._topics = None

    # cache bookkeeping ------------------------------------------------

    def _fresh(self, name, key, outputs) -> bool:
        kf = self.cache_dir / f"{name}.key"
        return kf.exists() and kf.read_text() == key and all(p.exists() for p in outputs)

    def _mark(self, name, key):
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        (self.cache_dir / f"{name}.key").write_text(key)

    def _run(self, stage, name, key, outputs, compute):
        self._keys[name] = key
        if self._fresh(name, key, outputs):
            _log.info("%s: cached", name)
            return
        _log.info("%s: running", name)
        compute()
        self._mark(name, key)
        self.executed.append(name)

    # stages -------------------------------------------------------------

    def ingest(self):
        c = self.config
        if not c.dataset:
            raise ValueError("no dataset given")
        key = _key("ingest", _file_digest(c.dataset), c.format, c.filter_unique,
                   c.sample_fraction, c.sample_before_filter, c.test_fraction, c.seed)
        paths = [self.out / n for n in ("dataset.tsv", "train.tsv", "test.tsv", "stats.tsv")]

        def compute():
            ds = corpus.parse_posts(c.dataset, c.format)
            raw_stats = ds.stats()

            def sample(d):
                if c.sample_fraction < 1:
                    return corpus.sample_users(d, c.sample_fraction, c.seed + SEED_SAMPLE)
                return d

            if c.sample_before_filter:
                ds = sample(ds)
            if c.filter_unique:
                ds = corpus.filter_unique_resources(ds)
            if not c.sample_before_filter:
                ds = sample(ds)
            if len(ds) == 0:
                raise ValueError("empty dataset after filtering")
            self.out.mkdir(parents=True, exist_ok=True)
            corpus.write_posts(ds, paths[0])
            split = self._load_split()
            corpus.write_posts(split.train, paths[1])
            if len(split.test):
                corpus.write_posts(split.test, paths[2])
            else:
                paths[2].write_text("")
            with open(paths[3], "w", encoding="utf-8") as f:
                f.write("set\tposts\tusers\tresources\ttags\ttas\n")
                for label, st in (("raw", raw_stats), ("filtered", ds.stats()),
                                  ("train", split.train.stats()), ("test", split.test.stats())):
                    f.write(label + "\t" + "\t".join(str(st[k]) for k in
                                                     ("posts", "users", "resources", "tags", "tas")) + "\n")

        self._run("ingest", "ingest", key, paths, compute)

    def _load_split(self) -> corpus.SplitDataset:
        if self._split is None:
            ds = corpus.parse_posts(self.out / "dataset.tsv")
            self._split = corpus.chronological_split(ds, self.config.test_fraction)
        return self._split

    def topics(self):
        c = self.config
        path = self.out / "topics.tsv"
        if c.topics_path:
            key = _key("topics", "external", _file_digest(c.topics_path))
        else:
            key = _key("topics", self._keys["ingest"], c.lda_topics, c.lda_iterations,
                       c.lda_cutoff, c.lda_alpha, c.lda_beta, c.lda_train_only, c.seed)

        def compute():
            if c.topics_path:
                table = topics.read_topics(c.topics_path)
            else:
                split = self._load_split()
                ds = split.train if c.lda_train_only else corpus.parse_posts(self.out / "dataset.tsv")
                model = topics.fit_lda(ds, c.lda_topics, c.lda_iterations, c.seed + SEED_LDA,
                                       alpha=c.lda_alpha or None, beta=c.lda_beta)
                table = topics.TopicTable.from_model(model, c.lda_cutoff)
            topics.write_topics(table, path)

        self._run("topics", "topics", key, [path], compute)
        self._topics = None

    def _load_topics(self) -> topics.TopicTable:
        if self._topics is None:
            n = None if self.config.topics_path else self.config.lda_topics
            self._topics = topics.read_topics(self.out / "topics.tsv", n)
        return self._topics

    def train_sustain(self):
        c = self.config
        path = self.out / "networks.tsv"
        key = _key("sustain", self._keys["topics"], c.sustain_r, c.sustain_beta, c.sustain_eta,
                   c.sustain_tau, c.sustain_seed_first)

        def compute():
            split = self._load_split()
            users = split.evaluable_users()
            _WORKER_STATE.update(train=split.train, topics=self._load_topics(),
                                 params=c.sustain_params(), seed_first=c.sustain_seed_first)
            try:
                nets = _pmap(_train_one, users, c.workers)
            finally:
                _WORKER_STATE.clear()
            sustain.write_networks(dict(zip(users, nets)), path)

        self._run("train-sustain", "train-sustain", key, [path], compute)

    def _rec_key(self, algo):
        c = self.config
        base = [self._keys["ingest"], c.k]
        if algo == "CF_U":
            base += [c.cf_user_k]
        elif algo == "CF_R":
            base += [c.cf_resource_k]
        elif algo == "CB_T":
            base += [self._keys["topics"]]
        elif algo == "WRMF":
            base += [c.wrmf_factors, c.wrmf_iterations, c.wrmf_reg, c.wrmf_conf_alpha, c.seed]
        elif algo == "SUSTAIN+CF_U":
            base += [self._keys["train-sustain"], c.cf_user_k, c.hybrid_alpha,
                     c.hybrid_candidates, c.hybrid_normalize]
        return _key("recommend", algo, *base)

    def _recommender(self, algo, split, matrix):
        c = self.config
        k = c.k
        if algo == "MP":
            ranked = baselines.most_popular(split.train)

            def rec(user):
                owned = matrix.owned(user)
                return ranking.exclude(ranked[:k + len(owned)], owned)[:k]
            return rec
        if algo == "CF_U":
            return lambda user: neighbors.cf_user_scores(matrix, user, c.cf_user_k, k)
        if algo == "CF_R":
            return lambda user: neighbors.cf_resource_scores(matrix, user, c.cf_resource_k, k)
        if algo == "CB_T":
            table = self._load_topics()

            def rec(user):
                profile = baselines.user_topic_profile(split.train, user, table)
                return baselines.cb_topic_scores(profile, table, k, matrix.owned(user))
            return rec
        if algo == "WRMF":
            model = wrmf.train_wrmf(matrix, c.wrmf_factors, c.wrmf_iterations, c.wrmf_reg,
                                    c.wrmf_conf_alpha, c.seed + SEED_WRMF)
            return lambda user: wrmf.wrmf_scores(model, matrix, user, k)
        if algo == "SUSTAIN+CF_U":
            nets = sustain.read_networks(self.out / "networks.tsv")
            table = self._load_topics()
            cfg, params = c.hybrid_config(), c.sustain_params()
            return lambda user: hybrid.recommend(user, nets[user], matrix, table, cfg, params)
        raise ValueError(f"unknown algorithm {algo!r}")

    def recommend(self):
        c = self.config
        recs_dir = self.out / "recs"
        matrix = None
        for algo in c.algorithm_list():
            path = recs_dir / f"{algo}.tsv"

            def compute(algo=algo, path=path):
                nonlocal matrix
                split = self._load_split()
                if matrix is None:
                    matrix = neighbors.InteractionMatrix.from_dataset(split.train)
                users = split.evaluable_users()
                _WORKER_STATE["recommender"] = self._recommender(algo, split, matrix)
                try:
                    lists = _pmap(_recommend_one, users, c.workers)
                finally:
                    _WORKER_STATE.clear()
                recs_dir.mkdir(parents=True, exist_ok=True)
                ranking.write_recommendations(dict(zip(users, lists)), path)

            self._run("recommend", f"recommend-{algo}", self._rec_key(algo), [path], compute)

    def evaluate(self):
        c = self.config
        split = self._load_split()
        reports = []
        for algo in c.algorithm_list():
            recs = ranking.read_recommendations(self.out / "recs" / f"{algo}.tsv")
            reports.append(evaluation.evaluate(algo, recs, split, c.k))
        evaluation.write_metrics_csv(reports, self.out / "metrics.csv")
        evaluation.write_pr_curve_csv(reports, self.out / "pr_curve.csv")
        from . import plotting
        plotting.plot_pr_curves(reports, self.out / "pr_curve.png")
        plotting.plot_metric_bars(reports, self.out / "metrics.png")
        table = evaluation.format_table(reports)
        (self.out / "summary.txt").write_text(table + "\n", encoding="utf-8")
        self.reports = reports
        self.executed.append("evaluate")
        return table

    # driver -------------------------------------------------------------

    def run(self, until: str = "evaluate"):
        if until not in STAGES:
            raise ValueError(f"unknown stage {until!r}")
        self.out.mkdir(parents=True, exist_ok=True)
        marker = self.out / FAILURE_MARKER
        if marker.exists():
            marker.unlink()
        self.config.save(self.out / "config.txt")
        algos = set(self.config.algorithm_list())
        need_topics = bool(algos & {"CB_T", "SUSTAIN+CF_U"}) or until in ("topics", "train-sustain")
        need_sustain = "SUSTAIN+CF_U" in algos or until == "train-sustain"
        plan = [("ingest", self.ingest)]
        if need_topics:
            plan.append(("topics", self.topics))
        if need_sustain:
            plan.append(("train-sustain", self.train_sustain))
        plan += [("recommend", self.recommend), ("evaluate", self.evaluate)]
        for stage, step in plan:
            if STAGES.index(stage) > STAGES.index(until):
                break
            try:
                step()
            except Exception as exc:
                marker.write_text(f"stage: {stage}\nerror: {exc}\n", encoding="utf-8")
                raise StageError(stage, exc) from exc
        return self.reports


def run_pipeline(config: RunConfig, until: str = "evaluate") -> Pipeline:
    """Run every stage up to ``until``; returns the pipeline with its reports."""
    pipe = Pipeline(config)
    pipe.run(until)
    return pipe

