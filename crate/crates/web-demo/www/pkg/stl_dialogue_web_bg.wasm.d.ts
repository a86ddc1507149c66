/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_actions: (a: number) => [number, number];
export const demo_check: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_facts: (a: number) => [number, number];
export const demo_grid: (a: number) => [number, number];
export const demo_new: () => number;
export const demo_reset: (a: number) => void;
export const demo_state: (a: number) => [number, number];
export const demo_step: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_synthesize: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const demo_undo: (a: number) => void;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
