import pathlib

from ptso_verify import lang, semantics

CORPUS = pathlib.Path(__file__).parent / "corpus"


def load_corpus(name):
    return lang.parse_program((CORPUS / f"{name}.ptso").read_text())


def corpus_names():
    return sorted(p.stem for p in CORPUS.glob("*.ptso"))


def make_config(prog, labels=None, regs=None, bufs=None, mem=None):
    """Configuration builder with name-keyed overrides."""
    base = semantics.initial_config(prog)
    t = prog.tables
    lab = list(base.labels)
    for name, lbl in (labels or {}).items():
        lab[prog.proc_index(name)] = lbl
    rg = list(base.regs)
    for name, v in (regs or {}).items():
        rg[t["reg_index"][name]] = v
    bf = list(base.bufs)
    for name, entries in (bufs or {}).items():
        bf[prog.proc_index(name)] = tuple(tuple(e) for e in entries)
    mm = list(base.mem)
    for name, v in (mem or {}).items():
        mm[t["var_index"][name]] = v
    return semantics.Config(tuple(lab), tuple(rg), tuple(bf), tuple(mm))
