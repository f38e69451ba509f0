// Built with: wasm-bindgen --target web --out-dir www/pkg <crate>.wasm
import init, { ask, resolve_time, repair, catalog_size } from "./pkg/catalogql_web.js";

const $ = (id) => document.getElementById(id);

function el(tag, props = {}, text = "") {
  const e = document.createElement(tag);
  Object.assign(e, props);
  if (text) e.textContent = text;
  return e;
}

function table(rows) {
  const t = el("table");
  for (const [k, v] of rows) {
    const tr = el("tr");
    tr.append(el("th", {}, k), el("td", {}, String(v)));
    t.append(tr);
  }
  return t;
}

function fail(target, msg) {
  target.replaceChildren(el("pre", { className: "err" }, msg));
}

function showAnswer() {
  const out = JSON.parse(ask($("question").value, $("range").value));
  const target = $("answer");
  if (!out.ok) return fail(target, out.error);
  const a = out.answer;
  const s = a.selection;
  const hits = s.matched.map((h) => `${h.pattern} +${h.weight}`).join(", ") || "none";
  target.replaceChildren(
    el("pre", { className: "promql" }, a.query.promql),
    table([
      ["metric", `${s.entry.name} (${s.entry.type}, ${s.entry.category}, ${s.entry.priority})`],
      ["score", `${s.s_total} = keyword ${s.s_keyword} + type ${s.s_type} + specificity ${s.s_specificity} + priority ${s.s_priority}`],
      ["matched", hits],
      ["intent", a.intent.intent],
      ["window", `${a.time.duration_text} ${a.time.rate_syntax} (${a.time.strategy})`],
      ["candidates", a.candidate_count],
    ]),
    el("p", {}, a.explanation),
  );
}

function showTime() {
  const out = JSON.parse(resolve_time($("expr").value));
  const target = $("time");
  if (!out.ok) return fail(target, out.error);
  const t = out.time;
  const iso = (s) => new Date(s * 1000).toISOString().replace(".000", "");
  target.replaceChildren(table([
    ["strategy", t.strategy],
    ["start", iso(t.start)],
    ["end", iso(t.end)],
    ["duration", `${t.duration_text} (${t.duration_seconds} s)`],
    ["range syntax", t.rate_syntax],
  ]));
}

function showRepair() {
  const out = JSON.parse(repair($("broken").value, "[5m]"));
  const target = $("repaired");
  if (!out.ok) return fail(target, out.error);
  target.replaceChildren(
    el("pre", { className: "promql" }, out.query),
    table([
      ["repairs", out.repairs.join(", ") || "none"],
      ["issues before", out.issues_before.join("; ") || "none"],
      ["issues after", out.issues_after.join("; ") || "none"],
    ]),
  );
}

const enter = (input, fn) => $(input).addEventListener("keydown", (e) => e.key === "Enter" && fn());

await init();
$("status").textContent = `${catalog_size()} metrics in the built-in catalog. Everything runs in your browser.`;
$("ask").addEventListener("click", showAnswer);
$("resolve").addEventListener("click", showTime);
$("repair").addEventListener("click", showRepair);
enter("question", showAnswer);
enter("range", showAnswer);
enter("expr", showTime);
enter("broken", showRepair);
showAnswer();
showTime();
showRepair();
