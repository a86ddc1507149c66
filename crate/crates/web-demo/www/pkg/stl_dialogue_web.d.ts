/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Space-separated action names of the current demonstration.
     */
    actions(): string;
    check(formula: string): string;
    /**
     * Atoms true in the current state, as a JSON object.
     */
    facts(): string;
    /**
     * Grid layout as JSON.
     */
    grid(): string;
    constructor();
    reset(): void;
    /**
     * Current world state as JSON.
     */
    state(): string;
    step(action: string): string;
    synthesize(nl: string, oracle: string): string;
    undo(): void;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_actions: (a: number) => [number, number];
    readonly demo_check: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_facts: (a: number) => [number, number];
    readonly demo_grid: (a: number) => [number, number];
    readonly demo_new: () => number;
    readonly demo_reset: (a: number) => void;
    readonly demo_state: (a: number) => [number, number];
    readonly demo_step: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_synthesize: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly demo_undo: (a: number) => void;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
