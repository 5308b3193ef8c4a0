// Playground state machine: debounced renders against the local service,
// with stale responses dropped and the last good preview kept on errors.
//
// The controller is framework-free; timers and transport are injected so
// the render loop can be tested without a browser.
export const DEBOUNCE_MS = 300;
export class PlaygroundController {
    constructor(transport, hooks, timers = {
        set: (fn, ms) => setTimeout(fn, ms),
        clear: (h) => clearTimeout(h),
    }) {
        this.transport = transport;
        this.hooks = hooks;
        this.timers = timers;
        this.code = '';
        this.sheet = '';
        this.analysis = 'none';
        this.debug = false;
        this.timer = null;
        this.seq = 0; // sequence number of the newest request sent
        this.applied = 0; // newest sequence whose response was applied
        this.inFlight = false;
        this.dirty = false;
    }
    setCode(code) {
        this.code = code;
        this.schedule();
    }
    setSheet(sheet) {
        this.sheet = sheet;
        this.schedule();
    }
    setAnalysis(analysis) {
        this.analysis = analysis;
        this.schedule();
    }
    setDebug(debug) {
        this.debug = debug;
        this.schedule();
    }
    /** Fill both buffers from a bundled example and render immediately. */
    loadExample(example) {
        this.code = example.code;
        this.sheet = example.sheet;
        this.analysis = example.analysis ?? 'none';
        this.renderNow();
    }
    schedule() {
        if (this.timer !== null) {
            this.timers.clear(this.timer);
        }
        this.timer = this.timers.set(() => {
            this.timer = null;
            this.renderNow();
        }, DEBOUNCE_MS);
    }
    renderNow() {
        if (this.inFlight) {
            // keep a single request in flight; remember to re-render after
            this.dirty = true;
            return;
        }
        const mySeq = ++this.seq;
        const request = {
            code: this.code,
            sheet: this.sheet,
            lang: 'tiny',
            analysis: this.analysis,
            debug: this.debug,
        };
        this.inFlight = true;
        this.transport(request).then((response) => {
            this.inFlight = false;
            if (mySeq > this.applied) {
                this.applied = mySeq;
                this.apply(response);
            }
            this.flushDirty();
        }, (err) => {
            this.inFlight = false;
            this.hooks.onBanner(`render service unreachable: ${String(err)}`);
            this.flushDirty();
        });
    }
    flushDirty() {
        if (this.dirty) {
            this.dirty = false;
            this.renderNow();
        }
    }
    apply(response) {
        this.hooks.onBanner(null);
        this.hooks.onDiagnostics(response.diagnostics);
        this.hooks.onLayout?.(response.layout ?? null);
        const hasErrors = response.diagnostics.some((d) => d.severity === 'error');
        // a failed render keeps the previous preview visible
        if (!hasErrors || response.html !== '') {
            this.hooks.onPreview(response.html);
        }
    }
}
