import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // binding tests shell out to the core CLI; give them room
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
