pub mod codec;
pub mod diagnostic;
pub mod dsl;
pub mod generate;
pub mod json;
pub mod keyword;
pub mod matcher;
pub mod model;
pub mod template;
pub mod vocabulary;

#[cfg(test)]
mod testing;
