import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    setupFiles: ["tests/helpers.ts"],
    include: ["tests/**/*.test.ts"],
  },
});
