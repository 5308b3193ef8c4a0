// Browser wiring: two editor panes, example/analysis pickers, diagnostics
// with cursor jumps, and a sandboxed preview frame fed by the controller.
import { PlaygroundController } from './controller.js';
function el(id) {
    const found = document.getElementById(id);
    if (!found)
        throw new Error(`missing element #${id}`);
    return found;
}
const codeArea = el('code');
const sheetArea = el('sheet');
const exampleSelect = el('example');
const analysisSelect = el('analysis');
const preview = el('preview');
const diagnosticsPane = el('diagnostics');
const banner = el('banner');
const debugToggle = el('debug');
const layoutPane = el('layout');
const transport = async (req) => {
    const resp = await fetch('/render', {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(req),
    });
    if (!resp.ok)
        throw new Error(`HTTP ${resp.status}`);
    return (await resp.json());
};
function jumpTo(area, line, col) {
    const lines = area.value.split('\n');
    let offset = 0;
    for (let i = 0; i < Math.min(line - 1, lines.length); i++) {
        offset += lines[i].length + 1;
    }
    offset += Math.max(col - 1, 0);
    area.focus();
    area.setSelectionRange(offset, offset);
}
const controller = new PlaygroundController(transport, {
    onPreview(html) {
        preview.srcdoc = html;
    },
    onDiagnostics(diags) {
        diagnosticsPane.textContent = '';
        for (const d of diags) {
            const item = document.createElement('li');
            item.className = `diag diag-${d.severity}`;
            item.textContent = `${d.line}:${d.col} ${d.severity}: ${d.message}`;
            // diagnostics are about the sheet unless flagged as tiny syntax
            const target = d.message.startsWith('tiny') ? codeArea : sheetArea;
            item.addEventListener('click', () => jumpTo(target, d.line, d.col));
            diagnosticsPane.appendChild(item);
        }
    },
    onBanner(message) {
        banner.textContent = message ?? '';
        banner.style.display = message ? 'block' : 'none';
    },
    onLayout(layout) {
        layoutPane.style.display = layout ? 'block' : 'none';
        layoutPane.textContent = layout ? JSON.stringify(layout, null, 2) : '';
    },
});
codeArea.addEventListener('input', () => controller.setCode(codeArea.value));
sheetArea.addEventListener('input', () => controller.setSheet(sheetArea.value));
analysisSelect.addEventListener('change', () => controller.setAnalysis(analysisSelect.value));
debugToggle.addEventListener('change', () => controller.setDebug(debugToggle.checked));
let examples = [];
exampleSelect.addEventListener('change', () => {
    const name = exampleSelect.value;
    if (!name)
        return; // empty selection: no-op
    const found = examples.find((e) => e.name === name);
    if (!found) {
        console.warn(`unknown example ${name}`);
        return;
    }
    codeArea.value = found.code;
    sheetArea.value = found.sheet;
    analysisSelect.value = found.analysis;
    controller.loadExample(found);
});
async function boot() {
    try {
        const resp = await fetch('/examples');
        const body = (await resp.json());
        examples = body.examples;
        for (const example of examples) {
            const option = document.createElement('option');
            option.value = example.name;
            option.textContent = example.name;
            exampleSelect.appendChild(option);
        }
        const first = examples[0];
        if (first) {
            exampleSelect.value = first.name;
            codeArea.value = first.code;
            sheetArea.value = first.sheet;
            analysisSelect.value = first.analysis;
            controller.loadExample(first);
        }
    }
    catch (err) {
        banner.textContent = `could not load examples: ${String(err)}`;
        banner.style.display = 'block';
    }
}
void boot();
