pub mod abelian;
pub mod blocks;
pub mod criteria;
mod exact;
pub mod groups;
pub mod oracle;
pub mod pattern;
