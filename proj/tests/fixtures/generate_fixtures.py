#!/usr/bin/env python3
"""Regenerates the synthetic corpus fixtures in this directory.

The large corpus has the shape of an annotated wuxia dialogue corpus:
1,109 dialogue units, 3,591 directed relation instances and fixed label
counts per dimension. Output is deterministic for a given seed.

    python3 generate_fixtures.py [--seed 7]
"""

import argparse
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent

UNITS = 1109
INSTANCES = 3591
POLARITY = {"positive": 2087, "neutral": 361, "negative": 1143}
REL_TYPE = {"kinship": 598, "affiliative": 1931, "other": 1062}
HIERARCHY = {"senior": 946, "peer": 1698, "junior": 947}

LEADS = ("郭靖", "黄蓉")
CAST = [
    "朱聪", "柯镇恶", "韩宝驹", "南希仁", "全金发", "韩小莹", "洪七公", "黄药师",
    "欧阳锋", "欧阳克", "周伯通", "丘处机", "马钰", "王处一", "杨康", "穆念慈",
    "杨铁心", "包惜弱", "完颜洪烈", "梅超风", "陆乘风", "陆冠英", "一灯", "裘千仞",
    "拖雷", "华筝", "铁木真", "哲别", "沙通天", "梁子翁",
]

VERBS = ["说道", "道", "喝道", "叫道", "笑道", "问道"]
LINES = [
    "这还不是内功吗？", "你且说说，这一掌从何处学来？", "弟子不敢隐瞒。", "咱们快走罢。",
    "你这傻小子，当真不懂？", "多谢前辈指点。", "今日之事，决不与你干休！", "我在这里等你。",
    "此话当真？", "你若再来，休怪我无情。", "师父教训得是。", "这是我爹爹传下来的。",
    "好，咱们一言为定。", "你走罢，我不杀你。", "大哥，你没事么？", "这人武功好生了得。",
]
NARRATION = [
    "两人在林中并肩而行。", "天色渐晚，众人围坐火旁。", "他低头想了一会。", "只听得远处马蹄声响。",
    "她微微一笑，转过身去。", "厅上众人面面相觑。",
]


def labels_pool(counts, rng):
    pool = [label for label, n in counts.items() for _ in range(n)]
    rng.shuffle(pool)
    return pool


def build_unit(uid, novel, speakers, rng):
    """Context with one attributed quote per speaker turn; byte spans into the context."""
    context = rng.choice(NARRATION)
    quotes = []
    turns = speakers + [speakers[0]]
    for i, speaker in enumerate(turns):
        addressee = turns[i + 1] if i + 1 < len(turns) else turns[i - 1]
        utterance = rng.choice(LINES)
        context += f"{speaker}{rng.choice(VERBS)}：“"
        start = len(context.encode("utf-8"))
        context += utterance
        end = len(context.encode("utf-8"))
        context += "”"
        quotes.append({"speaker": speaker, "addressee": addressee, "utterance": utterance, "span": [start, end]})
    return {"id": uid, "novel_id": novel, "context": context, "quotes": quotes, "instances": []}


def generate_large(seed):
    rng = random.Random(seed)
    # 845 units carry three instances and 264 carry four: 845*3 + 264*4 = 3591.
    per_unit = [3] * 845 + [4] * 264
    rng.shuffle(per_unit)
    assert sum(per_unit) == INSTANCES and len(per_unit) == UNITS

    pol = labels_pool(POLARITY, rng)
    rel = labels_pool(REL_TYPE, rng)
    hie = labels_pool(HIERARCHY, rng)

    records = []
    k = 0
    for u in range(UNITS):
        novel = ("射雕英雄传", "神雕侠侣", "天龙八部")[u % 3]
        uid = f"ncre-u{u:05d}"
        leads_here = u % 3 != 2
        others = rng.sample(CAST, 2 if leads_here else 3)
        speakers = list(LEADS) + others[:1] if leads_here else others
        rng.shuffle(speakers)
        rec = build_unit(uid, novel, speakers, rng)
        pairs = [(a, b) for a in speakers for b in speakers if a != b]
        if leads_here:
            lead_pairs = [LEADS, LEADS[::-1]]
            rest = [p for p in pairs if p not in lead_pairs]
            rng.shuffle(rest)
            chosen = lead_pairs + rest[: per_unit[u] - 2]
        else:
            rng.shuffle(pairs)
            chosen = pairs[: per_unit[u]]
        for n, (s, o) in enumerate(chosen):
            rec["instances"].append({
                "id": f"{uid}-r{n}",
                "subject": s,
                "object": o,
                "gold": {"polarity": pol[k], "rel_type": rel[k], "hierarchy": hie[k]},
            })
            k += 1
        records.append(rec)
    assert k == INSTANCES
    return records


def table_unit():
    context = ("朱聪见郭靖出手沉稳，心下起疑，喝道：“这还不是内功吗？”"
               "郭靖不知如何回答，只得说道：“弟子实在不知道什么叫内功。”")
    quotes = []
    for speaker, addressee, utterance in (("朱聪", "郭靖", "这还不是内功吗？"),
                                          ("郭靖", "朱聪", "弟子实在不知道什么叫内功。")):
        start = context.encode("utf-8").index(utterance.encode("utf-8"))
        quotes.append({"speaker": speaker, "addressee": addressee, "utterance": utterance,
                       "span": [start, start + len(utterance.encode("utf-8"))]})
    return {
        "id": "demo-u00000",
        "novel_id": "射雕英雄传",
        "context": context,
        "quotes": quotes,
        "instances": [
            {"id": "demo-u00000-r0", "subject": "朱聪", "object": "郭靖",
             "gold": {"polarity": "negative", "rel_type": "affiliative", "hierarchy": "senior"}},
            {"id": "demo-u00000-r1", "subject": "郭靖", "object": "朱聪",
             "gold": {"polarity": "positive", "rel_type": "affiliative", "hierarchy": "junior"}},
        ],
    }


def small_from(records, target=50):
    out = [table_unit()]
    count = len(out[0]["instances"])
    for rec in records:
        if count >= target:
            break
        rec = json.loads(json.dumps(rec))
        rec["instances"] = rec["instances"][: target - count]
        count += len(rec["instances"])
        out.append(rec)
    assert count == target
    return out


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rec in sorted(records, key=lambda r: r["id"]):
            f.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")) + "\n")


CHAPTER = """第一回　风雪惊变

两人在林中并肩而行。
朱聪见郭靖出手沉稳，心下起疑，喝道：“这还不是内功吗？”
郭靖不知如何回答，只得说道：“弟子实在不知道什么叫内功。”
朱聪道：“那么这一掌是谁教你的？”
郭靖道：“是一位道长教的。”

天色渐晚，众人围坐火旁。
黄蓉笑道：“靖哥哥，你饿不饿？”
郭靖道：“有点饿了。”
“那我给你做叫化鸡。”黄蓉说。

第二回　江南七怪

柯镇恶对韩小莹说道：“七妹，你去看看。”
韩小莹道：“大哥放心。”
"""

ROLES = {"郭靖": "protagonist", "黄蓉": "protagonist", "欧阳锋": "antagonist",
         "欧阳克": "antagonist", "梅超风": "antagonist", "完颜洪烈": "antagonist"}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    records = generate_large(args.seed)
    write_jsonl(HERE / "ncre_synthetic.jsonl", records)
    write_jsonl(HERE / "corpus50.jsonl", small_from(records))

    novels = HERE / "novels"
    novels.mkdir(exist_ok=True)
    (novels / "shediao_ch01.txt").write_text(CHAPTER, encoding="utf-8")
    roster = sorted(set(LEADS) | set(CAST))
    (HERE / "roster.txt").write_text("\n".join(roster) + "\n", encoding="utf-8")
    (HERE / "roles.json").write_text(json.dumps(ROLES, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
